"""Optimal discrimination (``Pbest``) and exclusion (``Pworst``) measurements.

Both problems are the SDP ``max/min sum_i tr(A_i M_i)`` over POVMs, with
``A_i = p_i rho_i``.  A POVM is optimal for the maximum iff the Hermitian part
``Y`` of ``sum_i A_i M_i`` satisfies ``Y >= A_i`` for every ``i`` (for the
minimum, ``Y <= A_i``).  The solver below is a feasible primal-dual
interior-point method run on the support of the average state; its output is
judged only by that certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from . import linalg
from .config import DEFAULT
from .ensemble import Ensemble, average_state, require_valid
from .linalg import hermitian_part as _hermitize
from .measurement import Povm, pbm, pgm, success_probability

log = logging.getLogger(__name__)

Sense = Literal["max", "min"]

# fraction of the distance to the cone boundary taken per step
_STEP_FRACTION = 0.98
# weight of the uniform POVM mixed into the warm start to make it strictly interior
_INTERIOR_MIX = 0.25


class Certificate(NamedTuple):
    residual: float
    hermitian_defect: float


@dataclass(frozen=True, eq=False)
class OptimalSolution:
    value: float
    povm: Povm
    certificate_residual: float
    iterations: int
    converged: bool
    sense: Sense = "max"
    hermitian_defect: float = 0.0
    dual_bound: float = float("nan")


def certificate(e: Ensemble, m: Povm, sense: Sense) -> Certificate:
    """Optimality residual and anti-Hermitian defect of ``Y = sum_i p_i rho_i M_i``."""
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    if e.k != m.k or e.dim != m.dim:
        raise ValueError(f"ensemble (k={e.k}, d={e.dim}) does not match POVM (k={m.k}, d={m.dim})")
    return _certificate(e.weighted(), m.elements, sense)


def _certificate(a: np.ndarray, m: np.ndarray, sense: Sense) -> Certificate:
    y = (a @ m).sum(axis=0)
    defect = float(np.linalg.norm((y - y.conj().T) / 2, 2))
    ys = linalg.hermitian_part(y)
    gaps = ys[None] - a if sense == "max" else a - ys[None]
    lam = np.linalg.eigvalsh(_hermitize(gaps))[:, 0]
    return Certificate(max(0.0, -float(lam.min())), defect)


def check_certificate(e: Ensemble, m: Povm, sense: Sense) -> float:
    """Largest violation of the dual feasibility condition; zero iff ``m`` is optimal."""
    return certificate(e, m, sense).residual


def solve_pbest(
    e: Ensemble,
    tol: float = DEFAULT.solver_tol,
    max_iter: int = DEFAULT.max_iter,
    initial: Povm | None = None,
    rank_tol: float = DEFAULT.rank_tol,
) -> OptimalSolution:
    """Maximum success probability of discrimination, with a certified POVM."""
    return _solve(e, "max", tol, max_iter, initial, rank_tol)


def solve_pworst(
    e: Ensemble,
    tol: float = DEFAULT.solver_tol,
    max_iter: int = DEFAULT.max_iter,
    initial: Povm | None = None,
    rank_tol: float = DEFAULT.rank_tol,
) -> OptimalSolution:
    """Minimum success probability of discrimination (optimal exclusion error)."""
    return _solve(e, "min", tol, max_iter, initial, rank_tol)


def _solve(e, sense, tol, max_iter, initial, rank_tol) -> OptimalSolution:
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    require_valid(e)
    _, v = linalg.support(average_state(e), rank_tol)
    r = v.shape[1]
    kernel = np.eye(e.dim) - v @ v.conj().T
    vh = v.conj().T

    a = _hermitize(vh[None] @ e.weighted() @ v[None])
    sign = 1.0 if sense == "max" else -1.0

    if initial is None:
        initial = pgm(e, rank_tol) if sense == "max" else pbm(e, rank_tol)
    elif initial.k != e.k or initial.dim != e.dim:
        raise ValueError("initial POVM does not match the ensemble")
    m0 = _hermitize(vh[None] @ initial.elements @ v[None])
    m0 = (1 - _INTERIOR_MIX) * m0 + _INTERIOR_MIX * np.eye(r)[None] / e.k
    m0 = _renormalize(m0)

    def lift(m_red: np.ndarray) -> Povm:
        return Povm(_hermitize(v[None] @ m_red @ vh[None] + kernel[None] / e.k))

    target = tol / 100
    state = _Ipm(sign * a, m0)
    best = None
    it = 0
    centering = False
    for it in range(1, max_iter + 1):
        try:
            stalled = not state.step(centering=centering)
        except np.linalg.LinAlgError:
            stalled = True
        m_hat = _renormalize(state.m)
        cert = _certificate(a, m_hat, sense)
        value = float(np.real(np.einsum("iab,iba->", a, m_hat)))
        bound = sign * state.dual_objective()
        gap = abs(bound - value)
        score = max(cert.residual, cert.hermitian_defect, gap)
        if best is None or score < best[0]:
            best = (score, m_hat, bound, state.y.copy())
        if score <= target or stalled:
            break
        # anti-Hermitian part of Y is driven by distance from the central path
        centering = cert.residual <= target and gap <= target and not centering
    score, m_hat, bound, y = best
    if score > target:
        for cand in _polish(sign * a, m_hat, y):
            cert = _certificate(a, cand, sense)
            value = float(np.real(np.einsum("iab,iba->", a, cand)))
            cand_score = max(cert.residual, cert.hermitian_defect, abs(bound - value))
            if cand_score < score:
                score, m_hat = cand_score, cand
            if score <= target:
                break
    povm = lift(m_hat)
    cert = certificate(e, povm, sense)
    value = success_probability(e, povm)
    score = max(cert.residual, cert.hermitian_defect, abs(bound - value))
    converged = score <= tol
    if not converged:
        log.warning("%s solver stopped after %d iterations with residual %.3e", sense, it, score)
    return OptimalSolution(
        value=value,
        povm=povm,
        certificate_residual=cert.residual,
        iterations=it,
        converged=converged,
        sense=sense,
        hermitian_defect=cert.hermitian_defect,
        dual_bound=bound,
    )


def _renormalize(m: np.ndarray) -> np.ndarray:
    """Congruence ``S^-1/2 M_i S^-1/2`` with ``S = sum_i M_i``; restores completeness exactly."""
    s = linalg.hermitian_part(m.sum(axis=0))
    w, u = np.linalg.eigh(s)
    if w[0] <= 0:
        raise np.linalg.LinAlgError("POVM elements do not sum to a positive definite operator")
    t = (u * w**-0.5) @ u.conj().T
    return _hermitize(t[None] @ m @ t[None])


def _hermitian_basis(r: int) -> np.ndarray:
    """Orthonormal basis (over the reals) of ``r x r`` Hermitian matrices."""
    basis = []
    for a in range(r):
        e = np.zeros((r, r), dtype=complex)
        e[a, a] = 1
        basis.append(e)
    for a in range(r):
        for b in range(a + 1, r):
            e = np.zeros((r, r), dtype=complex)
            e[a, b] = e[b, a] = 1 / np.sqrt(2)
            basis.append(e)
            e = np.zeros((r, r), dtype=complex)
            e[a, b], e[b, a] = 1j / np.sqrt(2), -1j / np.sqrt(2)
            basis.append(e)
    return np.array(basis)


def _polish(c: np.ndarray, m: np.ndarray, y: np.ndarray, steps: int = 6):
    """Gauss-Newton on the complementarity system ``(Y - C_i) M_i = 0``, ``sum_i M_i = I``.

    Interior-point iterates only drive ``tr(Z_i M_i)`` to zero; the matrix
    product itself, and with it the anti-Hermitian part of ``Y``, lags at
    roughly its square root.  A few Newton steps from the last iterate close
    that gap.  Yields one renormalised PSD candidate per step.
    """
    k, r = c.shape[0], c.shape[1]
    basis = _hermitian_basis(r)
    nb = basis.shape[0]
    m, y = m.copy(), y.copy()
    for _ in range(steps):
        z = _hermitize(y[None] - c)
        rows = k * r * r + r * r
        jac = np.zeros((rows, (k + 1) * nb), dtype=complex)
        for i in range(k):
            blk = slice(i * r * r, (i + 1) * r * r)
            jac[blk, :nb] = (basis @ m[i]).reshape(nb, -1).T
            jac[blk, (i + 1) * nb : (i + 2) * nb] = (z[i] @ basis).reshape(nb, -1).T
            jac[k * r * r :, (i + 1) * nb : (i + 2) * nb] = basis.reshape(nb, -1).T
        f = np.concatenate([(z @ m).reshape(-1), (m.sum(axis=0) - np.eye(r)).reshape(-1)])
        jr = np.vstack([jac.real, jac.imag])
        fr = np.concatenate([f.real, f.imag])
        delta, *_ = np.linalg.lstsq(jr, -fr, rcond=None)
        y = y + np.tensordot(delta[:nb], basis, axes=1)
        m = m + np.tensordot(delta[nb:].reshape(k, nb), basis, axes=1)
        w, u = np.linalg.eigh(m)
        clipped = (u * np.clip(w, 0.0, None)[:, None, :]) @ np.conj(np.swapaxes(u, -1, -2))
        try:
            yield _renormalize(clipped)
        except np.linalg.LinAlgError:
            return


def _max_step(x: np.ndarray, dx: np.ndarray) -> float:
    """Largest ``alpha`` keeping every block of ``x + alpha dx`` PSD."""
    chol = np.linalg.cholesky(x)
    li = np.linalg.inv(chol)
    w = np.linalg.eigvalsh(_hermitize(li @ dx @ np.conj(np.swapaxes(li, -1, -2))))
    lam = w[:, 0].min()
    return np.inf if lam >= 0 else -1.0 / lam


class _Ipm:
    """Feasible primal-dual path following for ``max sum tr(C_i M_i)`` s.t. ``sum M_i = I``.

    Dual: ``min tr(Y)`` s.t. ``Z_i = Y - C_i >= 0``.  Uses the HKM direction
    with a Mehrotra predictor-corrector.
    """

    def __init__(self, c: np.ndarray, m0: np.ndarray):
        self.c = c
        self.k, self.r = c.shape[0], c.shape[1]
        self.m = m0.copy()
        top = max(float(np.linalg.eigvalsh(ci)[-1]) for ci in c)
        self.y = (top + 1.0) * np.eye(self.r, dtype=complex)

    def dual_objective(self) -> float:
        return float(np.real(np.trace(self.y)))

    def _z(self) -> np.ndarray:
        return _hermitize(self.y[None] - self.c)

    def _solve_dy(self, m: np.ndarray, zinv: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        r = self.r
        op = np.zeros((r * r, r * r), dtype=complex)
        for mi, zi in zip(m, zinv):
            op += np.kron(mi, zi.T) + np.kron(zi, mi.T)
        dy = np.linalg.solve(op / 2, rhs.reshape(-1)).reshape(r, r)
        return linalg.hermitian_part(dy)

    def step(self, centering: bool = False) -> bool:
        """One predictor-corrector step, or a pure centering step at fixed ``mu``."""
        m, eye = self.m, np.eye(self.r)
        z = self._z()
        zinv = _hermitize(np.linalg.inv(z))
        n = self.k * self.r
        mu = float(np.real(np.einsum("iab,iba->", m, z))) / n
        if not np.isfinite(mu) or mu <= 0 or mu < 1e-15 * max(1.0, abs(self.dual_objective())):
            return False
        zsum = zinv.sum(axis=0)

        if centering:
            dy = self._solve_dy(m, zinv, mu * zsum - eye)
            dm = mu * zinv - m - _hermitize(m @ dy[None] @ zinv)
            return self._advance(m, z, dm, dy)

        # predictor
        dy_a = self._solve_dy(m, zinv, -eye)
        dm_a = -m - _hermitize(m @ dy_a[None] @ zinv)
        ap = min(1.0, _max_step(m, dm_a))
        ad = min(1.0, _max_step(z, np.broadcast_to(dy_a, z.shape)))
        mu_aff = float(np.real(np.einsum("iab,iba->", m + ap * dm_a, z + ad * dy_a[None]))) / n
        sigma = (max(mu_aff, 0.0) / mu) ** 3

        # corrector with second-order term
        corr = _hermitize(dm_a @ dy_a[None] @ zinv)
        rhs = sigma * mu * zsum - eye - corr.sum(axis=0)
        dy = self._solve_dy(m, zinv, rhs)
        dm = sigma * mu * zinv - m - _hermitize(m @ dy[None] @ zinv) - corr
        return self._advance(m, z, dm, dy)

    def _advance(self, m, z, dm, dy) -> bool:
        ap = min(1.0, _STEP_FRACTION * _max_step(m, dm))
        ad = min(1.0, _STEP_FRACTION * _max_step(z, np.broadcast_to(dy, z.shape)))
        if ap < 1e-12 and ad < 1e-12:
            return False
        self.m = _hermitize(m + ap * dm)
        self.y = linalg.hermitian_part(self.y + ad * dy)
        return True


def lemma1_consistent(
    p_pgm: float,
    p_pbm: float,
    pbest: float,
    pworst: float,
    pworst_tol: float = 1e-6,
    pbest_tol: float = 1e-5,
) -> bool:
    """If the PBM is (numerically) optimal for exclusion, the PGM must be optimal for discrimination."""
    if p_pbm <= pworst + pworst_tol:
        return p_pgm >= pbest - pbest_tol
    return True
