"""Command-line experiment runner.

Subcommands::

    pgmpbm trine [--tol T] [--csv] [--out PATH]
    pgmpbm sweep --k K --trials N --seed S [--tol T] [--jobs J] [--out PATH]
    pgmpbm anomaly --copies K [--steps N] [--tol T] [--out PATH]
    pgmpbm solve FILE [--tol T] [--out PATH]

Exit status is 0 on success, 1 on invalid input, 2 if a solver failed to
converge (output is still written, with unconverged rows flagged).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import IO, Iterator, Sequence

import numpy as np

from . import __version__
from .analysis import DiscriminationReport, report
from .config import DEFAULT
from .ensemble import EnsembleError, anomaly_ensemble, random_ensemble, trine
from .measurement import pbm, pgm, trine_worst_measurement
from .optimal import solve_pbest, solve_pworst
from .serialization import FormatError, ReportWriter, load_ensemble, povm_to_json

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNCONVERGED = 2


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    trials: int = 1000
    k: int = 2
    tol: float = DEFAULT.solver_tol
    rank_tol: float = DEFAULT.rank_tol
    output_path: str = "-"

    def __post_init__(self):
        if self.trials < 0:
            raise ValueError(f"trials must be non-negative, got {self.trials}")
        if self.k < 2:
            raise ValueError(f"k must be at least 2, got {self.k}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@contextlib.contextmanager
def _open_out(path: str) -> Iterator[IO[str]]:
    if path in ("-", "", None):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def cmd_trine(tol: float = DEFAULT.solver_tol) -> dict:
    e = trine()
    rep = report(e, tol)
    return {
        "report": rep.to_dict(),
        "povms": {
            "pgm": povm_to_json(pgm(e)),
            "pbm": povm_to_json(pbm(e)),
            "worst": povm_to_json(trine_worst_measurement()),
        },
    }


def _sweep_row(args: tuple[int, int, float, float]) -> DiscriminationReport:
    k, seed, tol, rank_tol = args
    return report(random_ensemble(k, seed), tol, rank_tol)


def cmd_sweep(cfg: RunConfig, out: IO[str], jobs: int = 1) -> list[DiscriminationReport]:
    """One report row per random instance; trial ``t`` uses seed ``cfg.seed + t``."""
    tasks = [(cfg.k, cfg.seed + t, cfg.tol, cfg.rank_tol) for t in range(cfg.trials)]
    writer = ReportWriter(out, ("trial", "seed"))
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_sweep_row(t) for t in tasks]
    for t, rep in enumerate(rows):
        writer.write(rep, t, cfg.seed + t)
    if rows:
        for name in ("p_pgm", "p_pbm"):
            vals = np.array([getattr(r, name) for r in rows])
            writer.comment(f"summary {name} min={vals.min()!r} mean={vals.mean()!r} max={vals.max()!r}")
        writer.comment(f"summary unconverged={sum(not r.solver_converged for r in rows)}")
    return rows


def cmd_anomaly(
    copies: int, gamma_steps: int = 101, tol: float = DEFAULT.solver_tol, out: IO[str] | None = None
) -> list[tuple[float, DiscriminationReport]]:
    """Reports over ``gamma`` in ``linspace(0, 1, gamma_steps)``.

    Extra columns: ``gamma``, ``identification`` (PGM success) and
    ``avoidance`` (``1 - P_PBM``).
    """
    if gamma_steps < 2:
        raise ValueError(f"gamma_steps must be at least 2, got {gamma_steps}")
    gammas = np.linspace(0.0, 1.0, gamma_steps)
    anomaly_ensemble(copies, 0.0)  # range check before any work
    writer = ReportWriter(out, ("gamma", "identification", "avoidance")) if out is not None else None
    rows = []
    for g in gammas:
        rep = report(anomaly_ensemble(copies, float(g)), tol)
        rows.append((float(g), rep))
        if writer is not None:
            writer.write(rep, g, rep.p_pgm, 1 - rep.p_pbm)
    return rows


def _solution_json(sol) -> dict:
    return {
        "value": sol.value,
        "certificate_residual": sol.certificate_residual,
        "hermitian_defect": sol.hermitian_defect,
        "dual_bound": sol.dual_bound,
        "iterations": sol.iterations,
        "converged": sol.converged,
    }


def cmd_solve(input_path: str, tol: float = DEFAULT.solver_tol) -> dict:
    e = load_ensemble(input_path)
    best, worst = solve_pbest(e, tol), solve_pworst(e, tol)
    rep = report(e, tol, solutions=(best, worst))
    return {
        "report": rep.to_dict(),
        "povms": {
            "pgm": povm_to_json(pgm(e)),
            "pbm": povm_to_json(pbm(e)),
            "pbest": povm_to_json(best.povm),
            "pworst": povm_to_json(worst.povm),
        },
        "solvers": {"pbest": _solution_json(best), "pworst": _solution_json(worst)},
        "converged": rep.solver_converged,
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pgmpbm", description="Pretty good / pretty bad measurement experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--tol", type=float, default=DEFAULT.solver_tol, help="solver certificate tolerance")
        sp.add_argument("--out", default="-", help="output path (default: stdout)")

    sp = sub.add_parser("trine", help="trine-state example: report and the PGM, PBM and worst POVMs")
    common(sp)
    sp.add_argument("--csv", action="store_true", help="emit only the report as a CSV row")

    sp = sub.add_parser("sweep", help="reports for random qubit ensembles")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--jobs", type=int, default=1, help="worker processes (output order is unaffected)")
    common(sp)

    sp = sub.add_parser("anomaly", help="anomaly detection/avoidance sweep over gamma")
    sp.add_argument("--copies", type=int, required=True)
    sp.add_argument("--steps", type=int, default=101, help="number of gamma grid points in [0, 1]")
    common(sp)

    sp = sub.add_parser("solve", help="full report for an ensemble JSON file")
    sp.add_argument("file")
    common(sp)
    return p


def _dump_json(obj, out: IO[str]) -> None:
    json.dump(obj, out, indent=1)
    out.write("\n")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "trine":
            res = cmd_trine(args.tol)
            with _open_out(args.out) as out:
                if args.csv:
                    ReportWriter(out).write(DiscriminationReport(**res["report"]))
                else:
                    _dump_json(res, out)
            converged = res["report"]["solver_converged"]
        elif args.command == "sweep":
            cfg = RunConfig(seed=args.seed, trials=args.trials, k=args.k, tol=args.tol, output_path=args.out)
            with _open_out(cfg.output_path) as out:
                rows = cmd_sweep(cfg, out, jobs=args.jobs)
            converged = all(r.solver_converged for r in rows)
        elif args.command == "anomaly":
            with _open_out(args.out) as out:
                rows = cmd_anomaly(args.copies, args.steps, args.tol, out)
            converged = all(r.solver_converged for _, r in rows)
        else:
            res = cmd_solve(args.file, args.tol)
            with _open_out(args.out) as out:
                _dump_json(res, out)
            converged = res["converged"]
    except (FormatError, EnsembleError, ValueError, OSError) as exc:
        print(f"pgmpbm {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if not converged:
        print(f"pgmpbm {args.command}: warning: solver did not converge", file=sys.stderr)
        return EXIT_UNCONVERGED
    return EXIT_OK
