"""Dense matrix exponential and polynomial root finding.

``expm`` is the scaling-and-squaring Padé algorithm of Higham (2005): the
lowest Padé degree in {3, 5, 7, 9, 13} whose backward-error bound covers
``||A||_1`` is used directly, otherwise ``A`` is scaled by ``2**-s`` into the
degree-13 region and the result squared ``s`` times. No eigendecomposition is
involved, so defective matrices are handled like any other.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import lu_factor, lu_solve

__all__ = ["ExpmError", "RootFindingError", "expm", "polynomial_roots", "real_positive_roots"]


class ExpmError(ArithmeticError):
    """The matrix exponential could not be formed to working precision."""


class RootFindingError(ArithmeticError):
    pass


_THETA = {
    3: 1.495585217958292e-2,
    5: 2.539398330063230e-1,
    7: 9.504178996162932e-1,
    9: 2.097847961257068e0,
    13: 5.371920351148152e0,
}

_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (
        17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0,
    ),
    13: (
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0, 129060195264000.0, 10559470521600.0,
        670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
        960960.0, 16380.0, 182.0, 1.0,
    ),
}

# Squarings beyond this point mean ||A|| ~ 1e18; treat as a caller error.
_MAX_SQUARINGS = 64


def _pade_uv(A, m):
    b = _PADE[m]
    n = A.shape[0]
    ident = np.eye(n, dtype=A.dtype)
    A2 = A @ A
    if m < 13:
        powers = [ident, A2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ A2)
        u = sum(b[2 * j + 1] * powers[j] for j in range((m + 1) // 2))
        v = sum(b[2 * j] * powers[j] for j in range((m + 1) // 2))
        return A @ u, v
    A4 = A2 @ A2
    A6 = A2 @ A4
    u = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
    v = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident
    return u, v


def _solve_pade(u, v):
    lu = lu_factor(v - u, check_finite=False)
    return lu_solve(lu, v + u, check_finite=False)


def expm(A) -> np.ndarray:
    """Matrix exponential of a square array.

    Raises
    ------
    ExpmError
        If the input is not finite, needs an absurd number of squarings, or
        the Padé denominator is singular.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expm needs a square matrix, got shape {A.shape}")
    A = A.astype(np.result_type(A.dtype, np.float64))
    if not np.all(np.isfinite(A)):
        raise ExpmError("matrix exponential of a non-finite matrix")
    if A.shape[0] == 0:
        return A.copy()

    norm = np.linalg.norm(A, 1)
    for m in (3, 5, 7, 9):
        if norm <= _THETA[m]:
            u, v = _pade_uv(A, m)
            return _checked(_solve_pade(u, v))

    s = max(0, int(np.ceil(np.log2(norm / _THETA[13]))))
    if s > _MAX_SQUARINGS:
        raise ExpmError(f"||A||_1 = {norm:.3e} requires {s} squarings")
    u, v = _pade_uv(A / 2.0**s, 13)
    F = _solve_pade(u, v)
    for _ in range(s):
        F = F @ F
    return _checked(F)


def _checked(F):
    if not np.all(np.isfinite(F)):
        raise ExpmError("matrix exponential overflowed or the Pade denominator is singular")
    return F


def polynomial_roots(coeffs, polish_tol: float = 1e-10, max_newton: int = 50) -> np.ndarray:
    """All roots of ``sum_k coeffs[k] t**k`` (ascending order).

    Roots are the eigenvalues of the companion matrix, then refined by Newton
    steps until the relative residual ``|p(r)| / sum_k |c_k| |r|**k`` drops
    below ``polish_tol``.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.complex128), "b")
    if c.size == 0:
        raise RootFindingError("the zero polynomial has no isolated roots")
    deg = c.size - 1
    if deg == 0:
        return np.empty(0, dtype=np.complex128)

    companion = np.zeros((deg, deg), dtype=np.complex128)
    companion[1:, :-1] = np.eye(deg - 1)
    companion[:, -1] = -c[:-1] / c[-1]
    try:
        roots = np.linalg.eigvals(companion)
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"companion eigenvalues did not converge: {exc}") from exc

    p = np.polynomial.Polynomial(c)
    dp = p.deriv()
    scale = np.polynomial.Polynomial(np.abs(c))
    for i, r in enumerate(roots):
        for _ in range(max_newton):
            if abs(p(r)) <= polish_tol * scale(abs(r)):
                break
            d = dp(r)
            if d == 0:
                break
            r = r - p(r) / d
        if abs(p(r)) > polish_tol * scale(abs(r)):
            raise RootFindingError(f"root {r} left residual {abs(p(r)):.3e} after polishing")
        roots[i] = r
    return roots


def real_positive_roots(coeffs, imag_tol: float = 1e-8, zero_tol: float = 1e-12) -> np.ndarray:
    """Strictly positive real roots, sorted ascending.

    A root counts as real when ``|Im r| < imag_tol``; roots within
    ``zero_tol`` of the origin are dropped.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=np.complex128), "f")
    roots = polynomial_roots(c)
    real = roots.real[(np.abs(roots.imag) < imag_tol) & (roots.real > zero_tol)]
    return np.sort(real)
