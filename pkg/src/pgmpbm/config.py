"""Shared numerical tolerances."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    """Default tolerances used across the package.

    Every threshold is absolute except ``rank_tol``, which is relative to the
    largest eigenvalue of the operator being inverted.
    """

    hermitian_atol: float = 1e-12
    rank_tol: float = 1e-10
    psd_atol: float = 1e-9
    trace_atol: float = 1e-9
    prob_atol: float = 1e-12
    povm_atol: float = 1e-9
    solver_tol: float = 1e-7
    max_iter: int = 50_000

    def with_(self, **changes) -> Tolerances:
        return replace(self, **changes)


DEFAULT = Tolerances()
