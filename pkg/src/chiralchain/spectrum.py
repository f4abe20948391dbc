"""Spectral diagnostics of the (generally non-normal) coupling matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SpectrumError", "SpectralReport", "eigenvalues", "defectiveness", "non_normality"]


class SpectrumError(ArithmeticError):
    pass


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    min_singular_value: float
    tolerance: float
    defective: bool
    trace: complex

    @property
    def trace_residual(self) -> float:
        return abs(self.eigenvalues.sum() - self.trace)


def _sorted(w):
    return w[np.lexsort((w.imag, w.real))]


def eigenvalues(V) -> np.ndarray:
    """Eigenvalues sorted by real part (ties by imaginary part)."""
    M = np.asarray(V, dtype=np.complex128)
    try:
        w = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"eigenvalue solver failed: {exc}") from exc
    return _sorted(w)


def non_normality(V) -> float:
    """Frobenius norm of the commutator ``V V^dagger - V^dagger V``."""
    M = np.asarray(V, dtype=np.complex128)
    return float(np.linalg.norm(M @ M.conj().T - M.conj().T @ M))


def defectiveness(V, tol: float | None = None) -> SpectralReport:
    """Judge whether ``V`` lacks a complete eigenbasis.

    The eigenvector matrix returned by LAPACK has unit-norm columns; ``V`` is
    reported defective when its smallest singular value falls below ``tol``
    (default ``1e-8 * N``). Numerically normal matrices are diagonalizable by
    construction and are reported with a singular value of one, since
    LAPACK may hand back a skewed basis inside a degenerate eigenspace.
    """
    M = np.asarray(V, dtype=np.complex128)
    n = M.shape[0]
    if tol is None:
        tol = 1e-8 * n
    if tol <= 0:
        raise ValueError("tol must be positive")
    try:
        w, vecs = np.linalg.eig(M)
    except np.linalg.LinAlgError as exc:
        raise SpectrumError(f"eigenvector solver failed: {exc}") from exc

    scale = max(np.linalg.norm(M), 1.0)
    if non_normality(M) <= 1e-12 * scale**2:
        smin = 1.0
    else:
        smin = float(np.linalg.svd(vecs, compute_uv=False)[-1])
    return SpectralReport(_sorted(w), smin, tol, smin < tol, complex(np.trace(M)))
