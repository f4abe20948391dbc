"""JSON run configuration.

One JSON object per run. Angles may be given as numbers or as ``pi``
literals (``"pi"``, ``"pi/2"``, ``"2pi"``, ``"0.5*pi"``) so that exact
multiples of pi are not truncated in decimal. Unknown keys are rejected.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .analysis import DEFAULT_EPS_SLOPE, DEFAULT_MIN_WIDTH
from .chain import (
    DISTRIBUTIONS,
    ChainGeometry,
    ChiralRates,
    ExcitationPattern,
    Placement,
    build_positions,
)
from .dynamics import DEFAULT_DT, DEFAULT_T_END, DEFAULT_T_END_CASCADED, TimeGrid

__all__ = ["ConfigError", "RunConfig", "parse_angle", "load_config", "parse_config"]


class ConfigError(ValueError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"field {field!r}: {reason}")


_PI_RE = re.compile(
    r"^\s*(?P<num>[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+\.?\d*))?\s*$"
)


def parse_angle(value, field: str = "xi") -> float:
    """Number or ``pi`` literal to float radians."""
    if isinstance(value, bool):
        raise ConfigError(field, "expected a number or a pi literal")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        m = _PI_RE.match(value.lower())
        if m:
            num = float(m.group("num")) if m.group("num") else 1.0
            den = float(m.group("den")) if m.group("den") else 1.0
            if den == 0:
                raise ConfigError(field, "division by zero in pi literal")
            return num * math.pi / den
        try:
            return float(value)
        except ValueError:
            pass
    raise ConfigError(field, f"cannot read {value!r} as an angle")


@dataclass(frozen=True)
class RunConfig:
    N: int
    Ni: int = 1
    xi: float = math.pi
    gammaL: float = 0.0
    gammaR: float = 1.0
    placement: str = "end"
    dt: float = DEFAULT_DT
    t_end: float | None = None
    f: float = 0.0
    distribution: str = "uniform"
    seed: int = 0
    batch_size: int = 500
    max_realizations: int = 10_000
    convergence_tol: float = 1e-3
    eps_slope: float = DEFAULT_EPS_SLOPE
    min_width: float = DEFAULT_MIN_WIDTH

    def __post_init__(self):
        if self.t_end is None:
            default = DEFAULT_T_END_CASCADED if self.gammaL == 0 else DEFAULT_T_END
            object.__setattr__(self, "t_end", default)
        _validate(self)

    @property
    def rates(self) -> ChiralRates:
        return ChiralRates(self.gammaL, self.gammaR)

    @property
    def pattern(self) -> ExcitationPattern:
        return ExcitationPattern(self.Ni, Placement(self.placement))

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(self.t_end, self.dt)

    def geometry(self, seed: int | None = None) -> ChainGeometry:
        return build_positions(
            self.N, self.xi, self.f, self.seed if seed is None else seed, self.distribution
        )

    def with_overrides(self, **kw) -> "RunConfig":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


_INT = {"N", "Ni", "seed", "batch_size", "max_realizations"}
_FLOAT = {"gammaL", "gammaR", "dt", "t_end", "f", "convergence_tol", "eps_slope", "min_width"}


def _validate(c: RunConfig) -> None:
    for name in _INT:
        v = getattr(c, name)
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(name, f"expected an integer, got {v!r}")
    for name in _FLOAT:
        v = getattr(c, name)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ConfigError(name, f"expected a finite number, got {v!r}")
    checks = [
        ("N", c.N >= 1, "must be >= 1"),
        ("Ni", 1 <= c.Ni <= c.N, f"must satisfy 1 <= Ni <= N={c.N}"),
        ("xi", c.xi > 0, "must be positive"),
        ("gammaL", c.gammaL >= 0, "must be >= 0"),
        ("gammaR", c.gammaR >= 0, "must be >= 0"),
        ("gammaR", c.gammaL + c.gammaR > 0, "gammaL + gammaR must be positive"),
        ("placement", c.placement in {p.value for p in Placement}, "must be 'end' or 'central'"),
        ("dt", c.dt > 0, "must be positive"),
        ("t_end", c.t_end > 0, "must be positive"),
        ("f", 0 <= c.f < 1, "must lie in [0, 1)"),
        ("distribution", c.distribution in DISTRIBUTIONS, f"must be one of {DISTRIBUTIONS}"),
        ("seed", 0 <= c.seed < 2**64, "must be an unsigned 64-bit integer"),
        ("batch_size", c.batch_size >= 1, "must be >= 1"),
        ("max_realizations", c.max_realizations >= 1, "must be >= 1"),
        ("convergence_tol", c.convergence_tol > 0, "must be positive"),
        ("eps_slope", c.eps_slope > 0, "must be positive"),
        ("min_width", c.min_width >= 0, "must be >= 0"),
    ]
    for name, ok, reason in checks:
        if not ok:
            raise ConfigError(name, reason)
    if c.placement == "central" and (c.N - c.Ni) % 2:
        raise ConfigError("placement", f"central excitation needs N - Ni even, got N={c.N}, Ni={c.Ni}")
    try:
        c.grid
    except ValueError as exc:
        raise ConfigError("t_end", str(exc)) from None


_KEYS = {f.name for f in fields(RunConfig)}


def load_config(data: dict) -> RunConfig:
    """Validate a decoded JSON object and fill in defaults."""
    if not isinstance(data, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = sorted(set(data) - _KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "N" not in data:
        raise ConfigError("N", "required")
    kw = dict(data)
    if "xi" in kw:
        kw["xi"] = parse_angle(kw["xi"], "xi")
    for name in _FLOAT & kw.keys():
        if isinstance(kw[name], int) and not isinstance(kw[name], bool):
            kw[name] = float(kw[name])
    return RunConfig(**kw)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError("<file>", f"no such file: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    return load_config(data)
