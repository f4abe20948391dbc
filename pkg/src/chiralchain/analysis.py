"""Effective decay constants, excitation plateaus and ensemble summaries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

__all__ = [
    "HorizonTooShort",
    "DecayFit",
    "Plateau",
    "PlateauSet",
    "fit_decay",
    "detect_plateaus",
    "ensemble_stats",
]

WINDOW_FRACTION = 1e-3
LOG_FLOOR = 1e-12
DEFAULT_EPS_SLOPE = 1e-3
DEFAULT_MIN_WIDTH = 4.0
Z95 = 1.96


class HorizonTooShort(ValueError):
    """The series ends before ``P_tot`` has fallen to the fit threshold."""

    def __init__(self, t_end, level, reached):
        self.t_end = t_end
        self.level = level
        self.reached = reached
        super().__init__(
            f"horizon too short: P_tot fell only to {reached:.3e} of its initial value by "
            f"t={t_end:g}, needs {level:.0e}; extend t_end beyond {self.suggested_t_end:g}"
        )

    @property
    def suggested_t_end(self) -> float:
        # log-linear extrapolation of the decay seen so far
        if not 0 < self.reached < 1:
            return 2.0 * self.t_end
        return self.t_end * np.log(self.level) / np.log(self.reached)


@dataclass(frozen=True)
class DecayFit:
    gamma_f: float
    ci95_half_width: float
    fit_window_end: float
    n_points: int
    intercept: float = 0.0


def _series(t, p):
    t = np.asarray(t, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if t.shape != p.shape or t.ndim != 1:
        raise ValueError("time and population series must be 1-D and of equal length")
    return t, p


def fit_decay(t, p, level: float = WINDOW_FRACTION, free_intercept: bool = False) -> DecayFit:
    """Fit ``P_tot(t) = P_tot(0) exp(-gamma_f t)`` by least squares on the log.

    The window runs from the first sample to the first time ``P_tot`` is at
    or below ``level * P_tot(0)``; samples under ``1e-12`` are dropped. The
    model has the single parameter ``gamma_f``: ``ln(P/P(0))`` is regressed
    on ``t - t_0`` through the origin. ``free_intercept=True`` fits the
    two-parameter line ``ln P = c - gamma_f t`` instead. The confidence
    half-width is 1.96 standard errors of the slope.
    """
    t, p = _series(t, p)
    if not p[0] > 0:
        raise ValueError("P_tot(0) must be positive")
    below = np.nonzero(p <= level * p[0])[0]
    if below.size == 0:
        raise HorizonTooShort(float(t[-1]), level, float(p.min() / p[0]))
    end = below[0]
    tw, pw = t[: end + 1], p[: end + 1]
    keep = pw > LOG_FLOOR
    tw, pw = tw[keep], pw[keep]
    n = tw.size
    if n < 3:
        raise ValueError(f"only {n} samples inside the fit window; refine the time grid")
    window_end = float(t[end])

    if free_intercept:
        res = stats.linregress(tw, np.log(pw))
        return DecayFit(float(-res.slope), float(Z95 * res.stderr), window_end, n, float(res.intercept))

    x = tw - t[0]
    y = np.log(pw / p[0])
    sxx = x @ x
    slope = (x @ y) / sxx
    resid = y - slope * x
    stderr = np.sqrt((resid @ resid) / (n - 1) / sxx)
    return DecayFit(float(-slope), float(Z95 * stderr), window_end, n, float(np.log(p[0])))


@dataclass(frozen=True)
class Plateau:
    t_start: float
    t_end: float
    level: float

    @property
    def width(self) -> float:
        return self.t_end - self.t_start

    def intersects(self, a: float, b: float) -> bool:
        return self.t_start <= b and self.t_end >= a


@dataclass(frozen=True)
class PlateauSet:
    plateaus: tuple[Plateau, ...]
    eps_slope: float
    min_width: float

    def __iter__(self):
        return iter(self.plateaus)

    def __len__(self):
        return len(self.plateaus)

    def any_within(self, a: float, b: float) -> bool:
        return any(pl.intersects(a, b) for pl in self.plateaus)


def _runs(mask):
    """Start/stop index pairs (inclusive) of the True runs in ``mask``."""
    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.diff(padded)
    return zip(np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0] - 1)


def detect_plateaus(
    t, p, eps_slope: float = DEFAULT_EPS_SLOPE, min_width: float = DEFAULT_MIN_WIDTH
) -> PlateauSet:
    """Maximal intervals where ``|d ln P/dt| < eps_slope`` lasting ``>= min_width``.

    The logarithmic slope is taken by centred differences (one-sided at the
    ends); samples below ``1e-12`` never belong to a plateau.
    """
    t, p = _series(t, p)
    if t.size < 2:
        return PlateauSet((), eps_slope, min_width)
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise ValueError("plateau detection needs a uniform time grid")
    valid = p > LOG_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        logp = np.log(np.where(valid, p, LOG_FLOOR))
    slope = np.gradient(logp, dt[0])
    flat = valid & (np.abs(slope) < eps_slope)
    found = []
    for i, j in _runs(flat):
        if t[j] - t[i] >= min_width:
            found.append(Plateau(float(t[i]), float(t[j]), float(p[i : j + 1].mean())))
    return PlateauSet(tuple(found), eps_slope, min_width)


def ensemble_stats(series):
    """Pointwise sample mean and standard deviation (``n - 1`` normalization).

    ``series`` is a sequence of equal-length ``P_tot`` arrays or objects with a
    ``total_population`` attribute.
    """
    rows = [np.asarray(getattr(s, "total_population", s), dtype=np.float64) for s in series]
    if len(rows) < 2:
        raise ValueError("standard deviation needs at least two realizations")
    if len({r.shape for r in rows}) != 1:
        raise ValueError("all realizations must share one time grid")
    stack = np.vstack(rows)
    return stack.mean(axis=0), stack.std(axis=0, ddof=1)
