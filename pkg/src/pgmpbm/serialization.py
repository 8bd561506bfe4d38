"""JSON format for ensembles and POVMs, CSV rows for reports.

Matrices are nested lists ``dim x dim`` of ``[re, im]`` pairs.  An ensemble
file is ``{"dim": d, "probs": [...], "states": [matrix, ...]}``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import IO

import numpy as np

from .analysis import CSV_COLUMNS, DiscriminationReport
from .ensemble import Ensemble, require_valid
from .measurement import Povm


class FormatError(ValueError):
    """Malformed input file; the message names the offending field or line."""


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data, dim: int, where: str) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{where}: entries must be [re, im] number pairs ({exc})") from None
    if arr.shape != (dim, dim, 2):
        raise FormatError(f"{where}: expected shape ({dim}, {dim}, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def ensemble_to_json(e: Ensemble) -> dict:
    return {
        "dim": e.dim,
        "probs": [float(p) for p in e.probs],
        "states": [matrix_to_json(s) for s in e.states],
    }


def ensemble_from_json(data) -> Ensemble:
    """Parse and validate; raises :class:`FormatError` or :class:`~pgmpbm.ensemble.EnsembleError`."""
    if not isinstance(data, dict):
        raise FormatError("top level: expected a JSON object")
    for key in ("dim", "probs", "states"):
        if key not in data:
            raise FormatError(f"missing field {key!r}")
    dim = data["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise FormatError(f"field 'dim': expected a positive integer, got {dim!r}")
    probs = data["probs"]
    if not isinstance(probs, list) or not all(isinstance(p, (int, float)) and not isinstance(p, bool) for p in probs):
        raise FormatError("field 'probs': expected an array of numbers")
    states = data["states"]
    if not isinstance(states, list):
        raise FormatError("field 'states': expected an array of matrices")
    if len(states) != len(probs):
        raise FormatError(f"field 'states': {len(states)} states but {len(probs)} probabilities")
    mats = [matrix_from_json(s, dim, f"field 'states[{i}]'") for i, s in enumerate(states)]
    if not mats:
        raise FormatError("field 'states': empty")
    return require_valid(Ensemble(np.array(mats), np.array(probs, dtype=float)))


def load_ensemble(path: str | Path) -> Ensemble:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return ensemble_from_json(data)


def dump_ensemble(e: Ensemble, path: str | Path) -> None:
    Path(path).write_text(json.dumps(ensemble_to_json(e), indent=1) + "\n")


def povm_to_json(m: Povm) -> list:
    return [matrix_to_json(x) for x in m.elements]


def povm_from_json(data, dim: int) -> Povm:
    return Povm(np.array([matrix_from_json(x, dim, f"element {i}") for i, x in enumerate(data)]))


class ReportWriter:
    """CSV sink: one header line, report columns first in their fixed order."""

    def __init__(self, out: IO[str], extra_columns: tuple[str, ...] = ()):
        self._w = csv.writer(out, lineterminator="\n")
        self._out = out
        self._n_extra = len(extra_columns)
        self._w.writerow(CSV_COLUMNS + tuple(extra_columns))

    def write(self, rep: DiscriminationReport, *extra: float) -> None:
        if len(extra) != self._n_extra:
            raise ValueError(f"expected {self._n_extra} extra values, got {len(extra)}")
        tail = [repr(int(x)) if isinstance(x, (int, np.integer)) else repr(float(x)) for x in extra]
        self._w.writerow(rep.csv_row() + tail)

    def comment(self, text: str) -> None:
        self._out.write(f"# {text}\n")


def read_reports(path: str | Path) -> list[dict]:
    """Parse a CSV written by :func:`write_reports`, skipping ``#`` comment lines."""
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
