"""Chain geometry, chiral decay rates, coupling matrices and initial states.

All positions are stored as dimensionless phases ``k x`` and all rates in
units of the reference rate ``gamma`` (``gamma_right``, or ``gamma_left`` when
the right channel is closed). Times elsewhere in the package are ``gamma t``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ChainGeometry",
    "ChiralRates",
    "Placement",
    "ExcitationPattern",
    "CouplingKind",
    "CouplingMatrix",
    "build_positions",
    "build_coupling_matrix",
    "reciprocal_kernel",
    "directionality",
    "build_initial_state",
]

DISTRIBUTIONS = ("uniform", "gaussian")


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ChainGeometry:
    """Ordered atomic chain described by the phases ``k x_mu``.

    ``phases`` is a read-only array of length ``n_atoms``. ``nominal_spacing``
    is the lattice phase ``xi`` between neighbours and ``fluctuation_fraction``
    the peak-to-peak disorder amplitude in units of ``xi``.
    """

    n_atoms: int
    phases: np.ndarray
    nominal_spacing: float
    fluctuation_fraction: float = 0.0

    def __post_init__(self):
        phases = _frozen(self.phases, np.float64)
        object.__setattr__(self, "phases", phases)
        if self.n_atoms < 1 or phases.shape != (self.n_atoms,):
            raise ValueError(f"need {self.n_atoms} phases, got shape {phases.shape}")
        if not self.nominal_spacing > 0:
            raise ValueError("nominal_spacing must be positive")
        if self.fluctuation_fraction < 0:
            raise ValueError("fluctuation_fraction must be non-negative")
        if np.any(np.diff(phases) <= 0):
            raise ValueError("atoms must be strictly ordered along the chain")


@dataclass(frozen=True)
class ChiralRates:
    gamma_left: float
    gamma_right: float

    def __post_init__(self):
        gl, gr = float(self.gamma_left), float(self.gamma_right)
        if not (np.isfinite(gl) and np.isfinite(gr)):
            raise ValueError("decay rates must be finite")
        if gl < 0 or gr < 0:
            raise ValueError("decay rates must be non-negative")
        if gl + gr <= 0:
            raise ValueError("at least one decay channel must be open")
        object.__setattr__(self, "gamma_left", gl)
        object.__setattr__(self, "gamma_right", gr)

    @property
    def directionality(self) -> float:
        return directionality(self)

    @property
    def reference_rate(self) -> float:
        """The rate all other quantities are measured in."""
        return self.gamma_right if self.gamma_right > 0 else self.gamma_left

    @property
    def is_cascaded(self) -> bool:
        return self.gamma_left == 0.0


class Placement(str, enum.Enum):
    END = "end"
    CENTRAL = "central"


@dataclass(frozen=True)
class ExcitationPattern:
    """Uniform W state over ``n_excited`` atoms at the chain end or centre."""

    n_excited: int
    placement: Placement = Placement.END

    def __post_init__(self):
        object.__setattr__(self, "placement", Placement(self.placement))
        if self.n_excited < 1:
            raise ValueError("n_excited must be a positive integer")

    def validate(self, n_atoms: int) -> None:
        if self.n_excited > n_atoms:
            raise ValueError(f"cannot excite {self.n_excited} of {n_atoms} atoms")
        if self.placement is Placement.CENTRAL and (n_atoms - self.n_excited) % 2:
            raise ValueError(
                f"central excitation of {self.n_excited} atoms in a chain of "
                f"{n_atoms} leaves unequal flanks"
            )

    def first_index(self, n_atoms: int) -> int:
        self.validate(n_atoms)
        if self.placement is Placement.END:
            return 0
        return (n_atoms - self.n_excited) // 2


class CouplingKind(str, enum.Enum):
    CHIRAL = "chiral"
    RECIPROCAL = "reciprocal"


@dataclass(frozen=True)
class CouplingMatrix:
    entries: np.ndarray
    kind: CouplingKind = CouplingKind.CHIRAL
    rates: ChiralRates | None = field(default=None, compare=False)

    def __post_init__(self):
        entries = _frozen(self.entries, np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"coupling matrix must be square, got {entries.shape}")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "kind", CouplingKind(self.kind))

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.entries
        return self.entries.astype(dtype)


def build_positions(
    n_atoms: int,
    spacing: float,
    fluctuation: float = 0.0,
    seed: int = 0,
    distribution: str = "uniform",
) -> ChainGeometry:
    """Lattice phases ``mu * spacing`` (``mu = 1..N``) plus frozen disorder.

    Each atom is displaced independently by ``delta_mu`` with
    ``|delta_mu| <= fluctuation * spacing / 2``. ``"uniform"`` draws from the
    full interval; ``"gaussian"`` draws a normal with standard deviation
    ``fluctuation * spacing / 4`` truncated to the same interval. The result is
    a pure function of the arguments.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    if not 0 <= fluctuation < 1:
        raise ValueError(
            f"fluctuation fraction {fluctuation} must lie in [0, 1) to keep atoms ordered"
        )
    if distribution not in DISTRIBUTIONS:
        raise ValueError(f"unknown distribution {distribution!r}; use one of {DISTRIBUTIONS}")

    lattice = spacing * np.arange(1, n_atoms + 1, dtype=np.float64)
    if fluctuation == 0:
        return ChainGeometry(n_atoms, lattice, spacing, 0.0)

    half = 0.5 * fluctuation * spacing
    rng = np.random.default_rng(seed)
    if distribution == "uniform":
        delta = rng.uniform(-half, half, n_atoms)
    else:
        delta = rng.normal(0.0, 0.5 * half, n_atoms)
        bad = np.abs(delta) > half
        while bad.any():
            delta[bad] = rng.normal(0.0, 0.5 * half, int(bad.sum()))
            bad = np.abs(delta) > half
    return ChainGeometry(n_atoms, lattice + delta, spacing, float(fluctuation))


def directionality(rates: ChiralRates) -> float:
    gl, gr = rates.gamma_left, rates.gamma_right
    return (gr - gl) / (gr + gl)


def _separation_phase(phases):
    sep = np.abs(phases[:, None] - phases[None, :])
    return np.exp(-1j * sep)


def build_coupling_matrix(geom: ChainGeometry, rates: ChiralRates) -> CouplingMatrix:
    """Non-reciprocal coupling matrix driving ``dA/dt = V A``.

    Entries above the diagonal carry ``-gamma_left``, below it
    ``-gamma_right``, both times ``exp(-i |phase_mu - phase_nu|)``; the
    diagonal is ``-(gamma_left + gamma_right) / 2``.
    """
    phase = _separation_phase(geom.phases)
    n = geom.n_atoms
    V = np.where(
        np.tri(n, k=-1, dtype=bool),
        -rates.gamma_right * phase,
        -rates.gamma_left * phase,
    )
    np.fill_diagonal(V, -0.5 * (rates.gamma_left + rates.gamma_right))
    return CouplingMatrix(V, CouplingKind.CHIRAL, rates)


def reciprocal_kernel(geom: ChainGeometry, gamma: float = 1.0) -> CouplingMatrix:
    """Symmetric infinite-range kernel ``gamma [cos(d) + i sin|d|]``.

    With ``gamma_left = gamma_right = gamma`` the chiral matrix is recovered
    entrywise as ``V = -conj(J)``.
    """
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    d = geom.phases[:, None] - geom.phases[None, :]
    J = gamma * (np.cos(d) + 1j * np.sin(np.abs(d)))
    return CouplingMatrix(J, CouplingKind.RECIPROCAL, ChiralRates(gamma, gamma))


def build_initial_state(pattern: ExcitationPattern, n_atoms: int) -> np.ndarray:
    start = pattern.first_index(n_atoms)
    a0 = np.zeros(n_atoms, dtype=np.complex128)
    a0[start : start + pattern.n_excited] = 1.0 / np.sqrt(pattern.n_excited)
    return a0
