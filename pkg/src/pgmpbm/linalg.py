"""Dense Hermitian matrix kernel.

Operators are plain complex ``numpy`` arrays of shape ``(d, d)``.  Functions
here validate Hermiticity where it matters and otherwise stay out of the way.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import DEFAULT


class NotHermitianError(ValueError):
    """Raised when an operator fails the Hermitian symmetry check."""


class NotPSDError(ValueError):
    """Raised when an operator has an eigenvalue below the allowed threshold."""


class EigenDecomposition(NamedTuple):
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def as_matrix(x) -> np.ndarray:
    m = np.asarray(x, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    return m


def asymmetry(x: np.ndarray) -> float:
    """Largest entrywise deviation ``|x_ij - conj(x_ji)|``."""
    return float(np.max(np.abs(x - x.conj().T)))


def as_hermitian(x, atol: float = DEFAULT.hermitian_atol) -> np.ndarray:
    m = as_matrix(x)
    err = asymmetry(m)
    if err > atol:
        raise NotHermitianError(f"matrix is not Hermitian: max asymmetry {err:.3e} > {atol:.1e}")
    return m


def hermitian_part(x: np.ndarray) -> np.ndarray:
    """``(x + x^dag)/2``, applied to the last two axes (stacks allowed)."""
    return (x + np.conj(np.swapaxes(x, -1, -2))) / 2


def eigh(h, atol: float = DEFAULT.hermitian_atol) -> EigenDecomposition:
    """Eigendecomposition of a Hermitian operator, eigenvalues descending."""
    m = as_hermitian(h, atol)
    w, v = np.linalg.eigh(hermitian_part(m))
    return EigenDecomposition(w[::-1].copy(), v[:, ::-1].copy())


def support(h, rank_tol: float = DEFAULT.rank_tol) -> EigenDecomposition:
    """Eigenpairs of a PSD operator whose eigenvalue exceeds ``rank_tol * lambda_max``."""
    w, v = eigh(h)
    _check_psd(w, rank_tol)
    keep = w > rank_tol * max(w[0], 0.0)
    return EigenDecomposition(w[keep], v[:, keep])


def _check_psd(w: np.ndarray, rank_tol: float) -> None:
    lam_max = max(w[0], 0.0)
    if w[-1] < -rank_tol * lam_max or (lam_max == 0.0 and w[-1] < 0.0):
        raise NotPSDError(f"operator is not PSD: eigenvalue {w[-1]:.3e} (lambda_max {lam_max:.3e})")


def power_on_support(h, exponent: float, rank_tol: float = DEFAULT.rank_tol) -> np.ndarray:
    """``h**exponent`` on the support of ``h``; zero on its (numerical) kernel.

    Eigenvalues at or below ``rank_tol * lambda_max`` count as kernel, so
    negative exponents give the Moore-Penrose style pseudo-power.
    """
    w, v = support(h, rank_tol)
    return (v * w**exponent) @ v.conj().T


def support_projector(h, rank_tol: float = DEFAULT.rank_tol) -> np.ndarray:
    _, v = support(h, rank_tol)
    return v @ v.conj().T


def hs_inner(x, y) -> float:
    """Hilbert-Schmidt inner product ``tr(x y)`` of two Hermitian operators."""
    a, b = as_matrix(x), as_matrix(y)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    # tr(xy) = sum_ij x_ij y_ji
    return float(np.real(np.sum(a * b.T)))


def frobenius_norm(x) -> float:
    return float(np.linalg.norm(as_matrix(x), "fro"))


def trace_norm(x) -> float:
    """Sum of absolute eigenvalues of a Hermitian operator."""
    return float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(as_hermitian(x))))))


def kron(*factors) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, as_matrix(f))
    return out


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def min_eigenvalue(h) -> float:
    return float(np.linalg.eigvalsh(hermitian_part(as_matrix(h)))[0])


def is_psd(h, atol: float = DEFAULT.psd_atol) -> bool:
    return min_eigenvalue(h) >= -atol
