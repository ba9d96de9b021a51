"""Local-equilibrium distribution in a harmonic trap and the jump-kernel
moments that feed the damping force and the relaxation rates.

Everything here is one-dimensional along the trap axis.  Arrays over phase
space are indexed ``[position, momentum]``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline

from .units import SI, Units

__all__ = [
    "TrapConfig",
    "ThermalProfile",
    "PhaseSpaceGrid",
    "EquilibriumDistribution",
    "JumpMoments",
    "TailCutoffWarning",
    "momentum_cutoff",
    "chemical_potential_for_occupancy",
    "bose_equilibrium",
    "local_density",
    "derivative",
    "jump_moments",
    "phase_space_average",
    "liouville_residual",
]

STATISTICS = ("bose", "fermi")


class TailCutoffWarning(RuntimeWarning):
    """The momentum grid truncates a non-negligible part of the distribution."""


@dataclass(frozen=True)
class TrapConfig:
    omega: float
    mass: float
    dimension: int = 1

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"trap frequency must be positive, got {self.omega}")
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass}")
        if self.dimension not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dimension}")

    def potential(self, positions) -> np.ndarray:
        return 0.5 * self.mass * self.omega ** 2 * np.asarray(positions) ** 2


def _check_uniform(x: np.ndarray, name: str) -> float:
    if x.ndim != 1 or len(x) < 3:
        raise ValueError(f"{name} grid needs at least 3 points")
    steps = np.diff(x)
    h = steps.mean()
    if not h > 0 or np.abs(steps - h).max() > 1e-9 * abs(h):
        raise ValueError(f"{name} grid must be uniform and increasing")
    return float(h)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    positions: np.ndarray
    momenta: np.ndarray

    def __post_init__(self):
        _check_uniform(self.positions, "position")
        _check_uniform(self.momenta, "momentum")
        p = self.momenta
        if abs(p[0] + p[-1]) > 1e-12 * abs(p[-1]):
            raise ValueError("momentum grid must be symmetric about zero")

    @classmethod
    def build(cls, position_min: float, position_max: float, position_points: int,
              momentum_max: float, momentum_points: int) -> "PhaseSpaceGrid":
        if momentum_points % 2 == 0:
            momentum_points += 1  # keep p = 0 on the grid
        return cls(np.linspace(position_min, position_max, position_points),
                   np.linspace(-momentum_max, momentum_max, momentum_points))

    @property
    def dR(self) -> float:
        return float(self.positions[1] - self.positions[0])

    @property
    def dp(self) -> float:
        return float(self.momenta[1] - self.momenta[0])


@dataclass(frozen=True)
class ThermalProfile:
    temperature: np.ndarray  # K, one value per grid position
    chemical_potential: float  # J

    def __post_init__(self):
        if not np.all(np.asarray(self.temperature) > 0):
            raise ValueError("temperature must be positive everywhere")

    @classmethod
    def constant(cls, temperature: float, grid: PhaseSpaceGrid, chemical_potential: float):
        return cls(np.full(len(grid.positions), float(temperature)), chemical_potential)

    @classmethod
    def from_table(cls, path: str | Path, grid: PhaseSpaceGrid, chemical_potential: float):
        """Two-column text table (position in m, temperature in K), linearly
        interpolated onto the grid and held constant beyond its ends."""
        table = np.loadtxt(path, comments="#", delimiter=None, ndmin=2)
        if table.shape[1] != 2:
            raise ValueError(f"{path}: expected two columns, got {table.shape[1]}")
        order = np.argsort(table[:, 0])
        temps = np.interp(grid.positions, table[order, 0], table[order, 1])
        return cls(temps, chemical_potential)


@dataclass(frozen=True)
class EquilibriumDistribution:
    values: np.ndarray  # [position, momentum], dimensionless occupation
    statistics: str


def momentum_cutoff(mass: float, temperature_max: float, units: Units = SI) -> float:
    return 8.0 * np.sqrt(mass * units.k_B * temperature_max)


def chemical_potential_for_occupancy(trap: TrapConfig, grid: PhaseSpaceGrid, temperature: float,
                                     occupancy: float = 0.1, units: Units = SI) -> float:
    """Global mu giving the requested peak phase-space occupancy at ``temperature``."""
    eps_min = float(trap.potential(grid.positions).min())
    return eps_min - units.k_B * temperature * np.log1p(1.0 / occupancy)


def bose_equilibrium(grid: PhaseSpaceGrid, trap: TrapConfig, profile: ThermalProfile,
                     statistics: str = "bose", units: Units = SI) -> EquilibriumDistribution:
    """f0(p, R) = 1 / (exp[(eps - mu) / k_B T(R)] -+ 1), eps = p^2/2m + V(R)."""
    if statistics not in STATISTICS:
        raise ValueError(f"unknown statistics {statistics!r}")
    R, p = grid.positions, grid.momenta
    eps = p[None, :] ** 2 / (2 * trap.mass) + trap.potential(R)[:, None]
    x = (eps - profile.chemical_potential) / (units.k_B * np.asarray(profile.temperature)[:, None])
    if statistics == "bose":
        if np.any(x <= 0):
            raise ValueError("Bose occupation diverges: eps - mu <= 0 on the grid "
                             f"(mu = {profile.chemical_potential:.6e})")
        values = 1.0 / np.expm1(x)
    else:
        values = 1.0 / (np.exp(x) + 1.0)
    return EquilibriumDistribution(values=values, statistics=statistics)


def local_density(f: EquilibriumDistribution, grid: PhaseSpaceGrid, units: Units = SI) -> np.ndarray:
    """n(R) = (1/2 pi hbar) sum_p f0(p, R) dp  (particles per metre)."""
    values = f.values
    peak = values.max()
    if peak > 0:
        tail = max(values[:, 0].max(), values[:, -1].max())
        if tail > 1e-10 * peak:
            warnings.warn(f"momentum cutoff too small: tail/peak = {tail / peak:.2e}",
                          TailCutoffWarning, stacklevel=2)
    # fixed left-to-right order keeps the reduction bit-reproducible
    return np.add.reduce(values, axis=1) * grid.dp / (2 * np.pi * units.hbar)


def derivative(values: np.ndarray, spacing: float) -> np.ndarray:
    """Second-order central differences, second-order one-sided at the ends."""
    values = np.asarray(values, dtype=float)
    # shifting by a constant keeps the one-sided stencils exact on flat data
    return np.gradient(values - values[0], spacing, edge_order=2)


@dataclass(frozen=True)
class JumpMoments:
    """Zeroth and first moments of a momentum-jump kernel.

    ``m0 = 2 pi hbar n``.  The raw first moment is purely imaginary,
    ``+-i pi hbar^2 n'``; ``m1`` stores the real value after multiplying by
    ``2/(i hbar)``.
    """

    m0: np.ndarray
    m1: np.ndarray
    side: int  # +1: kernel over R + z/2, -1: kernel over R - z/2

    def scaled(self, factor: float) -> "JumpMoments":
        return JumpMoments(self.m0 * factor, self.m1 * factor, self.side)


def _side(side) -> int:
    if side in (1, "J1", "j1", "plus"):
        return 1
    if side in (-1, 2, "J2", "j2", "minus"):
        return -1
    raise ValueError(f"unknown kernel side {side!r}")


def jump_moments(n: np.ndarray, positions: np.ndarray, side=-1, units: Units = SI,
                 mode: str = "analytic", kernel_width: float | None = None) -> JumpMoments:
    """Moments of J(j, R) = int dz exp(i j z / hbar) n(R +- z/2).

    ``mode="analytic"`` uses the continuum delta identities.  ``mode="quadrature"``
    evaluates the Fourier integrals by direct discrete sums over truncated z and
    j windows (with a Gaussian taper on j of z-width ``kernel_width``, default
    the grid spacing) and is meant for cross-checking.  The taper smooths n
    over about half its width, a relative bias of roughly (width/L)^2 / 8 for
    a profile varying on the length scale L.
    """
    positions = np.asarray(positions, dtype=float)
    n = np.asarray(n, dtype=float)
    dR = _check_uniform(positions, "position")
    sgn = _side(side)
    hbar = units.hbar
    if mode == "analytic":
        m0 = 2 * np.pi * hbar * n
        raw1 = sgn * 1j * np.pi * hbar ** 2 * derivative(n, dR)
    elif mode == "quadrature":
        m0, raw1 = _quadrature_moments(n, positions, sgn, hbar, kernel_width or dR)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    m1 = (2 / (1j * hbar) * raw1).real
    return JumpMoments(m0=np.real(m0), m1=m1, side=sgn)


def _quadrature_moments(n, positions, sgn, hbar, width):
    spline = CubicSpline(positions, n, extrapolate=True)
    sigma_j = hbar / width
    dz = width / 8
    z = np.arange(-10 * width, 10 * width + dz / 2, dz)
    # j spacing keeps the aliasing period 2 pi hbar / dj above twice the z window
    dj = 0.9 * np.pi * hbar / (z[-1] - z[0])
    j = np.arange(-10 * sigma_j, 10 * sigma_j + dj / 2, dj)
    taper = np.exp(-0.5 * (j / sigma_j) ** 2)
    phase = np.exp(1j * np.outer(j, z) / hbar)  # [j, z]
    samples = spline(positions[:, None] + sgn * z[None, :] / 2)  # [R, z]
    kernel = samples @ phase.T * dz  # J(j, R) as [R, j]
    m0 = kernel @ (taper * dj)
    raw1 = kernel @ (taper * j * dj)
    return m0, raw1


def phase_space_average(f: EquilibriumDistribution, field: np.ndarray) -> float:
    """f0-weighted average of a field given on the [position, momentum] grid
    (or on positions only)."""
    w = f.values
    field = np.asarray(field)
    if field.ndim == 1:
        field = field[:, None]
    return float(np.add.reduce((w * field).ravel()) / np.add.reduce(w.ravel()))


def liouville_residual(f: EquilibriumDistribution, grid: PhaseSpaceGrid, trap: TrapConfig) -> np.ndarray:
    """(p/m) d_R f - m omega^2 R d_p f on the interior of the grid."""
    v = f.values
    dfdR = (v[2:, 1:-1] - v[:-2, 1:-1]) / (2 * grid.dR)
    dfdp = (v[1:-1, 2:] - v[1:-1, :-2]) / (2 * grid.dp)
    R = grid.positions[1:-1, None]
    p = grid.momenta[None, 1:-1]
    return p / trap.mass * dfdR - trap.mass * trap.omega ** 2 * R * dfdp
