"""Seeded Monte Carlo over frozen atomic position disorder.

Every realization ``i`` draws its own chain from ``derive_seed(master, i)``,
so a realization does not depend on which worker ran it or when. Results are
folded into the running statistics strictly in index order, which makes the
ensemble output bit-identical for any worker count.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .chain import (
    ChainGeometry,
    ChiralRates,
    ExcitationPattern,
    build_coupling_matrix,
    build_initial_state,
    build_positions,
)
from .dynamics import TimeGrid, step_propagator

__all__ = [
    "EnsembleConfig",
    "EnsembleResult",
    "EnsembleError",
    "derive_seed",
    "derive_seeds",
    "default_workers",
    "realization_geometry",
    "run_ensemble",
]

log = logging.getLogger(__name__)

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

WORKERS_ENV = "CHIRALCHAIN_WORKERS"


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _M1) & _MASK
    z = ((z ^ (z >> 27)) * _M2) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """SplitMix64 output for counter ``index`` of the stream keyed by ``master``.

    For a fixed master the map ``index -> seed`` is a bijection on 64-bit
    integers, so distinct indices never collide.
    """
    if index < 0:
        raise ValueError("realization index must be non-negative")
    key = _mix64(master & _MASK)
    return _mix64((key + (index + 1) * _GOLDEN) & _MASK)


def derive_seeds(master: int, indices) -> np.ndarray:
    """Vectorized :func:`derive_seed` returning ``uint64``."""
    idx = np.asarray(indices, dtype=np.uint64)
    key = np.uint64(_mix64(master & _MASK))
    with np.errstate(over="ignore"):
        z = key + (idx + np.uint64(1)) * np.uint64(_GOLDEN)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV)
    if raw:
        n = int(raw)
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be a positive integer, got {raw!r}")
        return n
    return os.cpu_count() or 1


class EnsembleError(RuntimeError):
    def __init__(self, index: int, cause: BaseException):
        self.index = index
        super().__init__(f"realization {index} failed: {cause}")


@dataclass(frozen=True)
class EnsembleConfig:
    n_atoms: int
    spacing: float
    rates: ChiralRates
    pattern: ExcitationPattern
    grid: TimeGrid
    fluctuation: float
    distribution: str = "uniform"
    batch_size: int = 500
    max_realizations: int = 10_000
    convergence_tol: float = 1e-3
    master_seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_realizations < 1:
            raise ValueError("max_realizations must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")
        if not 0 <= self.master_seed <= _MASK:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        self.pattern.validate(self.n_atoms)
        # fail fast on a bad fluctuation fraction or distribution
        build_positions(self.n_atoms, self.spacing, self.fluctuation, 0, self.distribution)


@dataclass(frozen=True)
class EnsembleResult:
    times: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    realizations_used: int
    converged: bool
    batch_deltas: tuple[float, ...] = field(default=())

    @property
    def upper(self) -> np.ndarray:
        return self.mean + self.std

    @property
    def lower(self) -> np.ndarray:
        return self.mean - self.std


def realization_geometry(cfg: EnsembleConfig, index: int) -> ChainGeometry:
    return build_positions(
        cfg.n_atoms,
        cfg.spacing,
        cfg.fluctuation,
        derive_seed(cfg.master_seed, index),
        cfg.distribution,
    )


def _total_population(cfg: EnsembleConfig, geom: ChainGeometry, a0) -> np.ndarray:
    V = build_coupling_matrix(geom, cfg.rates)
    U = step_propagator(V, cfg.grid.dt)
    return kernels.total_population(U, a0, cfg.grid.n_steps)


def run_ensemble(cfg: EnsembleConfig, workers: int | None = None) -> EnsembleResult:
    """Average ``P_tot`` over disorder realizations until the mean settles.

    Realizations are processed in batches of ``cfg.batch_size``. After every
    batch past the first, the sup-norm change of the running mean is compared
    with ``cfg.convergence_tol``; the run stops on convergence or once
    ``cfg.max_realizations`` have been used.
    """
    workers = default_workers() if workers is None else workers
    a0 = build_initial_state(cfg.pattern, cfg.n_atoms)
    static = None
    if cfg.fluctuation == 0:
        static = _total_population(cfg, realization_geometry(cfg, 0), a0)

    def one(index):
        if static is not None:
            return static
        try:
            return _total_population(cfg, realization_geometry(cfg, index), a0)
        except Exception as exc:
            raise EnsembleError(index, exc) from exc

    n_t = cfg.grid.n_steps + 1
    mean = np.zeros(n_t)
    m2 = np.zeros(n_t)
    count = 0
    deltas: list[float] = []
    converged = False
    previous = None

    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while count < cfg.max_realizations:
            batch = range(count, min(count + cfg.batch_size, cfg.max_realizations))
            results = pool.map(one, batch) if pool else map(one, batch)
            for x in results:
                count += 1
                d = x - mean
                mean += d / count
                m2 += d * (x - mean)
            if previous is not None:
                delta = float(np.max(np.abs(mean - previous)))
                deltas.append(delta)
                log.info("ensemble: %d realizations, running-mean change %.3e", count, delta)
                if delta < cfg.convergence_tol:
                    converged = True
                    break
            previous = mean.copy()
    finally:
        if pool:
            pool.shutdown()

    std = np.sqrt(m2 / (count - 1)) if count > 1 else np.zeros(n_t)
    return EnsembleResult(cfg.grid.times, mean, std, count, converged, tuple(deltas))
