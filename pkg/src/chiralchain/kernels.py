"""Hot inner loops of the amplitude propagation.

Each kernel exists twice: a numba ``@njit`` loop and a pure-numpy equivalent.
The public names at the bottom of the module are bound to one or the other
according to :mod:`chiralchain._backend`. Both variants are always importable
as ``*_numba`` / ``*_numpy`` so they can be benchmarked and cross-checked in
one process.
"""

import numpy as np

from ._backend import USE_NUMBA, njit

# Number of precomputed propagator powers used by the numpy path.
_BLOCK = 64

# Below this P_tot the rest of a population series is reported as exact zero.
# The norm never grows (||U|| <= 1), and stopping here keeps every product out
# of the subnormal range, where arithmetic is several times slower.
POPULATION_FLOOR = 1e-290


def propagate_numpy(U, a0, n_steps):
    """Return the ``(n_steps + 1, N)`` amplitude history of ``a_{k+1} = U a_k``."""
    U = np.ascontiguousarray(U, dtype=np.complex128)
    n = U.shape[0]
    out = np.empty((n_steps + 1, n), dtype=np.complex128)
    out[0] = a0
    if n_steps == 0:
        return out
    block = min(_BLOCK, n_steps)
    powers = np.empty((block, n, n), dtype=np.complex128)
    powers[0] = U
    for j in range(1, block):
        powers[j] = U @ powers[j - 1]
    k = 0
    while k < n_steps:
        m = min(block, n_steps - k)
        out[k + 1 : k + 1 + m] = powers[:m] @ out[k]
        k += m
    return out


def total_population_numpy(U, a0, n_steps):
    ptot = np.zeros(n_steps + 1)
    ptot[0] = np.vdot(a0, a0).real
    if n_steps == 0:
        return ptot
    chunk = 64 * _BLOCK
    k = 0
    cur = np.asarray(a0, dtype=np.complex128)
    while k < n_steps:
        m = min(chunk, n_steps - k)
        amps = propagate_numpy(U, cur, m)[1:]
        p = np.einsum("ij,ij->i", amps.real, amps.real) + np.einsum("ij,ij->i", amps.imag, amps.imag)
        low = np.nonzero(p < POPULATION_FLOOR)[0]
        if low.size:
            ptot[k + 1 : k + 1 + low[0]] = p[: low[0]]
            return ptot
        ptot[k + 1 : k + 1 + m] = p
        cur = amps[-1]
        k += m
    return ptot


def channel_rates_numpy(amps, phases, gamma_left, gamma_right):
    """Left/right emission rates for every row of ``amps``."""
    w = np.exp(1j * np.asarray(phases))
    left = gamma_left * np.abs(amps @ w.conj()) ** 2
    right = gamma_right * np.abs(amps @ w) ** 2
    return left, right


@njit(cache=True, nogil=True)
def propagate_numba(U, a0, n_steps):
    n = U.shape[0]
    out = np.empty((n_steps + 1, n), dtype=np.complex128)
    for i in range(n):
        out[0, i] = a0[i]
    for k in range(n_steps):
        for i in range(n):
            acc = 0.0j
            for j in range(n):
                acc += U[i, j] * out[k, j]
            out[k + 1, i] = acc
    return out


@njit(cache=True, nogil=True)
def total_population_numba(U, a0, n_steps):
    n = U.shape[0]
    cur = a0.copy()
    nxt = np.empty(n, dtype=np.complex128)
    ptot = np.empty(n_steps + 1)
    s = 0.0
    for i in range(n):
        s += cur[i].real * cur[i].real + cur[i].imag * cur[i].imag
    ptot[0] = s
    for k in range(n_steps):
        s = 0.0
        for i in range(n):
            acc = 0.0j
            for j in range(n):
                acc += U[i, j] * cur[j]
            nxt[i] = acc
            s += acc.real * acc.real + acc.imag * acc.imag
        if s < POPULATION_FLOOR:
            ptot[k + 1 :] = 0.0
            break
        ptot[k + 1] = s
        cur, nxt = nxt, cur
    return ptot


@njit(cache=True, nogil=True)
def channel_rates_numba(amps, phases, gamma_left, gamma_right):
    n_t, n = amps.shape
    w = np.exp(1j * phases)
    left = np.empty(n_t)
    right = np.empty(n_t)
    for k in range(n_t):
        sl = 0.0j
        sr = 0.0j
        for i in range(n):
            sl += w[i].conjugate() * amps[k, i]
            sr += w[i] * amps[k, i]
        left[k] = gamma_left * (sl.real * sl.real + sl.imag * sl.imag)
        right[k] = gamma_right * (sr.real * sr.real + sr.imag * sr.imag)
    return left, right


if USE_NUMBA:
    _propagate = propagate_numba
    _total_population = total_population_numba
    _channel_rates = channel_rates_numba
else:
    _propagate = propagate_numpy
    _total_population = total_population_numpy
    _channel_rates = channel_rates_numpy


def propagate(U, a0, n_steps):
    U = np.ascontiguousarray(U, dtype=np.complex128)
    a0 = np.ascontiguousarray(a0, dtype=np.complex128)
    return _propagate(U, a0, int(n_steps))


def total_population(U, a0, n_steps):
    """``|a_k|^2`` for ``k = 0..n_steps`` without storing the amplitudes."""
    U = np.ascontiguousarray(U, dtype=np.complex128)
    a0 = np.ascontiguousarray(a0, dtype=np.complex128)
    return _total_population(U, a0, int(n_steps))


def channel_rates(amps, phases, gamma_left, gamma_right):
    amps = np.ascontiguousarray(np.atleast_2d(amps), dtype=np.complex128)
    phases = np.ascontiguousarray(phases, dtype=np.float64)
    return _channel_rates(amps, phases, float(gamma_left), float(gamma_right))
