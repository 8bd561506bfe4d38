"""Bounds, identities and per-instance reports."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields

import numpy as np

from . import linalg
from .config import DEFAULT
from .ensemble import Ensemble, average_state, require_valid
from .measurement import p_pbm, p_pgm
from .optimal import OptimalSolution, solve_pbest, solve_pworst


class InvariantViolation(ArithmeticError):
    """A proven inequality or identity failed beyond its tolerance."""


@dataclass(frozen=True)
class DiscriminationReport:
    k: int
    pbest: float
    p_pgm: float
    blind: float
    p_pbm: float
    pworst: float
    thm1_lower: float
    thm2_upper: float
    r_norm1: float
    r_norm2_sq: float
    solver_converged: bool

    @property
    def thm1_slack(self) -> float:
        return self.p_pgm - self.thm1_lower

    @property
    def thm2_slack(self) -> float:
        return self.thm2_upper - self.p_pbm

    @property
    def duality_defect(self) -> float:
        return self.p_pgm + (self.k - 1) * self.p_pbm - 1

    def to_dict(self) -> dict:
        return asdict(self)

    def csv_row(self) -> list[str]:
        out = []
        for f in fields(self):
            x = getattr(self, f.name)
            if isinstance(x, bool):
                out.append("1" if x else "0")
            else:
                out.append(repr(x))
        return out


# serialization order of CSV and JSON
CSV_COLUMNS = tuple(f.name for f in fields(DiscriminationReport))


def r_vector(e: Ensemble, rank_tol: float = DEFAULT.rank_tol) -> np.ndarray:
    """``r_i = ||P^-1/4 p_i rho_i P^-1/4||_F``; ``||r||_2^2`` equals the PGM success probability."""
    require_valid(e)
    q = linalg.power_on_support(average_state(e), -0.25, rank_tol)
    return np.array([np.linalg.norm(q @ a @ q, "fro") for a in e.weighted()])


def _check_k(k: int) -> None:
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")


def thm1_lower_bound(pbest: float, k: int) -> float:
    """Lower bound on the PGM success probability: ``1/k + (1 - k pbest)^2 / (k (k-1))``."""
    _check_k(k)
    return 1 / k + (1 - k * pbest) ** 2 / (k * (k - 1))


def thm2_upper_bound(pbest: float, k: int) -> float:
    """Upper bound on the PBM success probability: ``1/k - (1 - k pbest)^2 / (k (k-1)^2)``."""
    _check_k(k)
    return 1 / k - (1 - k * pbest) ** 2 / (k * (k - 1) ** 2)


def check_chain(rep: DiscriminationReport, tol: float, pbest_ok: bool = True, pworst_ok: bool = True) -> None:
    """Raise :class:`InvariantViolation` unless ``Pbest >= P_PGM >= 1/k >= P_PBM >= Pworst``.

    Links touching an unconverged optimum are skipped.
    """
    links = [("P_PGM >= 1/k", rep.p_pgm - rep.blind), ("1/k >= P_PBM", rep.blind - rep.p_pbm)]
    if pbest_ok:
        links.insert(0, ("Pbest >= P_PGM", rep.pbest - rep.p_pgm))
    if pworst_ok:
        links.append(("P_PBM >= Pworst", rep.p_pbm - rep.pworst))
    for name, slack in links:
        if slack < -tol:
            raise InvariantViolation(f"{name} violated by {-slack:.3e} (tolerance {tol:.1e})")


def report(
    e: Ensemble,
    tol: float = DEFAULT.solver_tol,
    rank_tol: float = DEFAULT.rank_tol,
    solutions: tuple[OptimalSolution, OptimalSolution] | None = None,
) -> DiscriminationReport:
    """Headline probabilities and bound values for one instance.

    ``solutions`` may carry precomputed ``(pbest, pworst)`` solver results.
    """
    require_valid(e)
    k = e.k
    if solutions is None:
        solutions = (solve_pbest(e, tol, rank_tol=rank_tol), solve_pworst(e, tol, rank_tol=rank_tol))
    best, worst = solutions
    good = p_pgm(e, rank_tol)
    bad = p_pbm(e, rank_tol)
    r = r_vector(e, rank_tol)
    rep = DiscriminationReport(
        k=k,
        pbest=best.value,
        p_pgm=good,
        blind=1 / k,
        p_pbm=bad,
        pworst=worst.value,
        thm1_lower=thm1_lower_bound(best.value, k),
        thm2_upper=thm2_upper_bound(best.value, k),
        r_norm1=float(r.sum()),
        r_norm2_sq=float(r @ r),
        solver_converged=bool(best.converged and worst.converged),
    )
    if abs(rep.duality_defect) > 1e-12:
        raise InvariantViolation(f"P_PGM + (k-1) P_PBM = 1 violated by {rep.duality_defect:.3e}")
    check_chain(rep, tol, best.converged, worst.converged)
    return rep
