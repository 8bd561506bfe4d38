"""POVMs, the pretty good and pretty bad measurements, and offsets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .config import DEFAULT
from .ensemble import Ensemble, average_state, require_valid, trine_kets


class PovmError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Povm:
    """Effects ``M_1..M_k`` stacked as a ``(k, d, d)`` array."""

    elements: np.ndarray

    def __post_init__(self):
        el = np.array(self.elements, dtype=complex)
        if el.ndim != 3 or el.shape[1] != el.shape[2]:
            raise ValueError(f"POVM elements must have shape (k, d, d), got {el.shape}")
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)

    @property
    def k(self) -> int:
        return self.elements.shape[0]

    @property
    def dim(self) -> int:
        return self.elements.shape[1]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, i: int) -> np.ndarray:
        return self.elements[i]


def povm_defects(m: Povm) -> tuple[float, float, float]:
    """``(max asymmetry, most negative eigenvalue or 0, completeness error in Frobenius norm)``."""
    asym = max(linalg.asymmetry(x) for x in m.elements)
    neg = min(0.0, min(linalg.min_eigenvalue(x) for x in m.elements))
    completeness = linalg.frobenius_norm(m.elements.sum(axis=0) - np.eye(m.dim))
    return asym, -neg, completeness


def is_valid_povm(m: Povm, atol: float = DEFAULT.povm_atol) -> bool:
    asym, neg, completeness = povm_defects(m)
    return asym <= atol and neg <= atol and completeness <= atol


def require_valid_povm(m: Povm, atol: float = DEFAULT.povm_atol) -> Povm:
    asym, neg, completeness = povm_defects(m)
    if asym > atol or neg > atol or completeness > atol:
        raise PovmError(
            f"invalid POVM: asymmetry {asym:.3e}, negativity {neg:.3e}, completeness error {completeness:.3e}"
        )
    return m


def uniform_povm(k: int, dim: int) -> Povm:
    return Povm(np.repeat(np.eye(dim, dtype=complex)[None] / k, k, axis=0))


def pgm(e: Ensemble, rank_tol: float = DEFAULT.rank_tol) -> Povm:
    """Pretty good (square-root) measurement ``G_i = P^-1/2 p_i rho_i P^-1/2``.

    When ``P`` is singular the inverse square root is taken on its support and
    the kernel projector is split evenly, ``(I - Pi)/k`` going to each outcome.
    """
    require_valid(e)
    avg = average_state(e)
    w, v = linalg.support(avg, rank_tol)
    inv_sqrt = (v * w**-0.5) @ v.conj().T
    kernel = np.eye(e.dim) - v @ v.conj().T
    g = inv_sqrt[None] @ e.weighted() @ inv_sqrt[None] + kernel[None] / e.k
    return Povm(linalg.hermitian_part(g))


def pbm(e: Ensemble, rank_tol: float = DEFAULT.rank_tol) -> Povm:
    """Pretty bad measurement ``B_i = (I - G_i)/(k - 1)``."""
    require_valid(e)
    g = pgm(e, rank_tol).elements
    return Povm((np.eye(e.dim)[None] - g) / (e.k - 1))


def offset(m: Povm, s: int) -> Povm:
    """Cyclically relabelled POVM: outcome ``i`` becomes old outcome ``i + s (mod k)``."""
    if not 0 <= s < m.k:
        raise ValueError(f"offset must satisfy 0 <= s < {m.k}, got {s}")
    return Povm(np.roll(m.elements, -s, axis=0))


def _check_compatible(e: Ensemble, m: Povm) -> None:
    if e.k != m.k:
        raise ValueError(f"ensemble has {e.k} states but POVM has {m.k} outcomes")
    if e.dim != m.dim:
        raise ValueError(f"ensemble dimension {e.dim} does not match POVM dimension {m.dim}")


def outcome_table(e: Ensemble, m: Povm) -> np.ndarray:
    """``T[i, j] = p_i tr(rho_i M_j)``."""
    _check_compatible(e, m)
    return np.real(np.einsum("iab,jba->ij", e.weighted(), m.elements))


def success_probability(e: Ensemble, m: Povm) -> float:
    """``sum_i p_i tr(rho_i M_i)``."""
    return float(np.trace(outcome_table(e, m)))


def offset_profile(e: Ensemble, m: Povm) -> np.ndarray:
    """``alpha_s = sum_i p_i tr(rho_i M_{i+s})`` for ``s = 0..k-1``; sums to 1."""
    t = outcome_table(e, m)
    k = e.k
    i = np.arange(k)
    return np.array([t[i, (i + s) % k].sum() for s in range(k)])


def p_pgm(e: Ensemble, rank_tol: float = DEFAULT.rank_tol) -> float:
    """Success probability of the pretty good measurement.

    Evaluates ``sum_i p_i^2 tr(rho_i P^-1/2 rho_i P^-1/2)`` directly and checks
    it against the success probability of :func:`pgm`.  The two differ only by
    the discarded spectral weight of ``P`` divided by ``k``.
    """
    require_valid(e)
    avg = average_state(e)
    w_all = np.linalg.eigvalsh(linalg.hermitian_part(avg))
    w, v = linalg.support(avg, rank_tol)
    inv_sqrt = (v * w**-0.5) @ v.conj().T
    a = e.weighted()
    direct = float(np.real(sum(np.trace(x @ inv_sqrt @ x @ inv_sqrt) for x in a)))
    via_povm = success_probability(e, pgm(e, rank_tol))
    dropped = float(np.sum(w_all)) - float(np.sum(w))
    if abs(direct - via_povm) > 1e-12 + abs(dropped) / e.k:
        raise ArithmeticError(f"PGM success probability mismatch: {direct!r} vs {via_povm!r}")
    return via_povm


def p_pbm(e: Ensemble, rank_tol: float = DEFAULT.rank_tol) -> float:
    """Success probability of the pretty bad measurement, ``(1 - P_PGM)/(k - 1)``."""
    return success_probability(e, pbm(e, rank_tol))


def trine_worst_measurement() -> Povm:
    """``W_i = (2/3)|psi_i^perp><psi_i^perp|``, each trine ket rotated by ``pi/2``.

    Never fires on the state it is labelled with, so it excludes perfectly.
    """
    kets = trine_kets()
    perp = np.stack([-kets[:, 1], kets[:, 0]], axis=1)
    return Povm([(2 / 3) * linalg.ket_to_dm(v) for v in perp])
