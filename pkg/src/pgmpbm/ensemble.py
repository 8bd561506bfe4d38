"""Problem instances: finite ensembles of density operators with priors."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .config import DEFAULT

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY_2 = np.eye(2, dtype=complex)

MAX_ANOMALY_COPIES = 10


class EnsembleError(ValueError):
    """Raised when an ensemble is required to be valid and is not."""

    def __init__(self, report: ValidationReport):
        self.report = report
        super().__init__("invalid ensemble: " + "; ".join(v.message for v in report.violations))


@dataclass(frozen=True)
class Violation:
    field: str
    index: int | None
    magnitude: float
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class Ensemble:
    """States ``rho_1..rho_k`` (stacked as a ``(k, d, d)`` array) and priors ``p``.

    Construction does not validate; call :func:`validate` or
    :func:`require_valid`.
    """

    states: np.ndarray
    probs: np.ndarray
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        states = np.array(self.states, dtype=complex)
        if states.ndim != 3 or states.shape[1] != states.shape[2]:
            raise ValueError(f"states must have shape (k, d, d), got {states.shape}")
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.shape[0] != states.shape[0]:
            raise ValueError(f"{states.shape[0]} states but {probs.shape[0]} probabilities")
        states.setflags(write=False)
        probs.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "probs", probs)

    @property
    def k(self) -> int:
        return self.states.shape[0]

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    def weighted(self) -> np.ndarray:
        """The stack ``p_i rho_i``."""
        return self.probs[:, None, None] * self.states


def validate(e: Ensemble, tols=DEFAULT) -> ValidationReport:
    out: list[Violation] = []
    if e.k < 2:
        out.append(Violation("states", None, float(e.k), f"need at least 2 states, got {e.k}"))
    for i, rho in enumerate(e.states):
        asym = linalg.asymmetry(rho)
        if asym > tols.hermitian_atol:
            out.append(Violation("states", i, asym, f"state {i} is not Hermitian (max asymmetry {asym:.3e})"))
            continue
        tr = float(np.real(np.trace(rho)))
        if abs(tr - 1) > tols.trace_atol:
            out.append(Violation("states", i, tr, f"state {i} has trace {tr:.12g}, expected 1"))
        lam = linalg.min_eigenvalue(rho)
        if lam < -tols.psd_atol:
            out.append(Violation("states", i, lam, f"state {i} is not PSD (min eigenvalue {lam:.3e})"))
    if not np.all(np.isfinite(e.probs)):
        out.append(Violation("probs", None, float("nan"), "probabilities are not finite"))
    else:
        for i, p in enumerate(e.probs):
            if p < 0:
                out.append(Violation("probs", i, float(p), f"probability {i} is negative ({p:.6g})"))
        total = float(np.sum(e.probs))
        if abs(total - 1) > tols.prob_atol:
            out.append(Violation("probs", None, total, f"probabilities sum to {total:.12g}, expected 1"))
    return ValidationReport(tuple(out))


def require_valid(e: Ensemble, tols=DEFAULT) -> Ensemble:
    report = validate(e, tols)
    if not report.ok:
        raise EnsembleError(report)
    return e


def average_state(e: Ensemble) -> np.ndarray:
    """``P = sum_i p_i rho_i``."""
    return np.einsum("i,ijk->jk", e.probs, e.states)


def tilde_transform(e: Ensemble, tols=DEFAULT) -> Ensemble:
    """Ensemble whose i-th state mixes every state except ``rho_i``.

    ``rho~_i = sum_{j != i} p_j rho_j / (1 - p_i)`` with priors
    ``p~_i = (1 - p_i) / (k - 1)``.  The average state is unchanged.
    """
    require_valid(e, tols)
    p = e.probs
    if np.any(np.abs(p - 1) <= tols.prob_atol):
        i = int(np.argmax(p))
        raise ValueError(f"tilde transform needs p_i != 1 for all i; p_{i} = {p[i]!r}")
    total = average_state(e)
    rest = total[None] - e.weighted()
    states = rest / (1 - p)[:, None, None]
    return Ensemble(states, (1 - p) / (e.k - 1))


def trine() -> Ensemble:
    """Three real qubit states 120 degrees apart, uniform priors."""
    return Ensemble([linalg.ket_to_dm(v) for v in trine_kets()], np.full(3, 1 / 3))


def trine_kets() -> np.ndarray:
    """Rows ``cos(2 pi j / 3)|0> + sin(2 pi j / 3)|1>`` for ``j = 0, 1, 2``."""
    angles = 2 * np.pi * np.arange(3) / 3
    return np.stack([np.cos(angles), np.sin(angles)], axis=1).astype(complex)


def bloch_qubit(theta: float, phi: float) -> np.ndarray:
    """Pure qubit ``I/2 + (sin t cos f X + sin t sin f Y + cos t Z)/2``."""
    st = np.sin(theta)
    return (IDENTITY_2 + st * np.cos(phi) * PAULI_X + st * np.sin(phi) * PAULI_Y + np.cos(theta) * PAULI_Z) / 2


def random_ensemble(k: int, rng_seed: int) -> Ensemble:
    """``k`` random pure qubits with a random prior, reproducible from the seed.

    Both Bloch angles are drawn uniformly from ``[0, 2*pi)``; the prior is
    uniform on the probability simplex (normalised exponential draws).
    """
    if k < 2:
        raise ValueError(f"k must be at least 2, got {k}")
    rng = np.random.default_rng(rng_seed)
    angles = rng.uniform(0.0, 2 * np.pi, size=(k, 2))
    weights = rng.exponential(size=k)
    states = [bloch_qubit(t, f) for t, f in angles]
    return Ensemble(states, weights / weights.sum())


def anomaly_kets(copies: int, gamma: float) -> np.ndarray:
    """Rows ``|0>^(i-1) (x) |psi> (x) |0>^(k-i)`` with ``|psi> = g|0> + sqrt(1-g^2)|1>``."""
    if not 2 <= copies <= MAX_ANOMALY_COPIES:
        raise ValueError(f"copies must be in [2, {MAX_ANOMALY_COPIES}], got {copies}")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError(f"gamma must be in [0, 1], got {gamma}")
    zero = np.array([1.0, 0.0], dtype=complex)
    psi = np.array([gamma, np.sqrt(1.0 - gamma**2)], dtype=complex)
    kets = []
    for i in range(copies):
        factors = [zero] * copies
        factors[i] = psi
        v = factors[0]
        for f in factors[1:]:
            v = np.kron(v, f)
        kets.append(v)
    return np.array(kets)


def anomaly_ensemble(copies: int, gamma: float) -> Ensemble:
    kets = anomaly_kets(copies, gamma)
    return Ensemble([linalg.ket_to_dm(v) for v in kets], np.full(copies, 1 / copies))


def identical_ensemble(rho, k: int, probs=None) -> Ensemble:
    rho = linalg.as_hermitian(rho)
    probs = np.full(k, 1 / k) if probs is None else probs
    return Ensemble(np.repeat(rho[None], k, axis=0), probs)


def orthogonal_ensemble(k: int, dim: int | None = None, probs=None) -> Ensemble:
    """``|0>, ..., |k-1>`` in dimension ``dim`` (default ``k``)."""
    dim = k if dim is None else dim
    states = np.zeros((k, dim, dim), dtype=complex)
    states[np.arange(k), np.arange(k), np.arange(k)] = 1
    return Ensemble(states, np.full(k, 1 / k) if probs is None else probs)


def gram_matrix(kets) -> np.ndarray:
    v = np.asarray(kets, dtype=complex)
    return v.conj() @ v.T
