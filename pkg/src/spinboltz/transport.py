"""Damping force, inverse relaxation matrices and the single-mode spin
dynamics.

The single-mode ansatz f_ij(p, R, T) = f(p, R) rho_ij(T) reduces the kinetic
equation to a 3x3 equation for rho.  Its right-hand side is linear in rho once
the spin structure carried by the jump kernels (the ``background``) is fixed:

    d rho/dt = -(i/hbar) [q Sz^2, rho]
               -(i/hbar) c_mf (L rho - rho R)          coherent (mean field)
               -(kappa c_mf / hbar + c_f) (L rho + rho R)   relaxation + force

where L and R are the two pairs of scattering sums (with the Bose "+" or Fermi
"-" sign), c_mf = <m0>/(2 pi hbar) and c_f = <m1 d_p f/f>/(2 pi hbar).  With
the background equal to the current rho the flow is the self-consistent
(nonlinear) single-mode dynamics.

Density matrices are vectorised row-major: vec(A rho B) = kron(A, B.T) vec(rho).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import scipy.linalg

from .equilibrium import JumpMoments
from .spin_algebra import InteractionTensor, SpinMatrices, su3_decompose
from .units import SI, Units

log = logging.getLogger(__name__)

__all__ = [
    "NumericalError",
    "NoOscillationError",
    "SpinDensityMatrix",
    "DampingForce",
    "InverseRelaxation",
    "AveragedMoments",
    "SingleModeSuperOperator",
    "SingleModeModel",
    "Trajectory",
    "OscillationResult",
    "initial_state",
    "kernel_contraction",
    "damping_force",
    "inverse_relaxation",
    "scattering_operators",
    "assemble_single_mode",
    "evolve_rk4",
    "evolve_eigen",
    "pair_populations",
    "oscillation_analysis",
]


class NumericalError(RuntimeError):
    """A numerical guard tripped (stability, NaN, non-convergence)."""


class NoOscillationError(ValueError):
    pass


def hermiticity_defect(rho: np.ndarray) -> float:
    return float(np.abs(rho - rho.conj().T).max())


@dataclass(frozen=True)
class SpinDensityMatrix:
    rho: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got {rho.shape}")
        if hermiticity_defect(rho) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if not 0 < tr <= 1 + 1e-10:
            raise ValueError(f"trace {tr} outside (0, 1]")
        object.__setattr__(self, "rho", rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def is_positive(self, tol: float = 1e-12) -> bool:
        return bool(np.linalg.eigvalsh(self.rho).min() >= -tol)


def initial_state(epsilon: float = 0.1) -> SpinDensityMatrix:
    """Pure state with amplitudes (sqrt(eps/2), sqrt(1-eps), sqrt(eps/2))."""
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    psi = np.array([np.sqrt(epsilon / 2), np.sqrt(1 - epsilon), np.sqrt(epsilon / 2)])
    return SpinDensityMatrix(np.outer(psi, psi.conj()).astype(complex))


def _as_rho(rho) -> np.ndarray:
    if isinstance(rho, SpinDensityMatrix):
        return rho.rho
    return np.asarray(rho, dtype=complex)


def kernel_contraction(u: InteractionTensor, rho) -> np.ndarray:
    """A_in = sum_ml U_mnil rho_lm."""
    rho = _as_rho(rho)
    if rho.shape != (u.dim, u.dim):
        raise ValueError(f"density matrix shape {rho.shape} does not match tensor dimension {u.dim}")
    return np.einsum("mnil,lm->in", u.u, rho)


# ---------------------------------------------------------------------------
# Force and relaxation matrices over the position grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DampingForce:
    f_matrix: np.ndarray  # [R, 3, 3], newtons
    su3_components: np.ndarray  # [R, 9] = (c0, c1..c8)


@dataclass(frozen=True)
class InverseRelaxation:
    tau_inv: np.ndarray  # [R, 3, 3], 1/s


def damping_force(u: InteractionTensor, moments: JumpMoments, rho, units: Units = SI) -> DampingForce:
    """F_in(R) = 2 sum_ml U_mnil rho_lm m1(R) / (2 pi hbar)."""
    if moments.side != -1:
        raise ValueError("the damping force uses the R - z/2 kernel (side=-1)")
    a = kernel_contraction(u, rho)
    f = 2 * a[None, :, :] * (moments.m1 / (2 * np.pi * units.hbar))[:, None, None]
    comps = np.empty((len(f), 9))
    for k, fk in enumerate(f):
        c0, c = su3_decompose(fk)
        comps[k, 0] = c0
        comps[k, 1:] = c
    return DampingForce(f_matrix=f, su3_components=comps)


def inverse_relaxation(u: InteractionTensor, moments: JumpMoments, rho, units: Units = SI,
                       collision_factor: float = 1.0) -> InverseRelaxation:
    """tau^-1_in(R) = 2 kappa sum_ml U_mnil rho_lm m0(R) / (2 pi hbar^2)."""
    if moments.side != -1:
        raise ValueError("the relaxation matrix uses the R - z/2 kernel (side=-1)")
    a = kernel_contraction(u, rho)
    scale = collision_factor * moments.m0 / (2 * np.pi * units.hbar ** 2)
    return InverseRelaxation(tau_inv=2 * a[None, :, :] * scale[:, None, None])


# ---------------------------------------------------------------------------
# Single-mode superoperator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AveragedMoments:
    """Phase-space averaged kernel moments entering the single-mode equation.

    m0: <m0>, f0-weighted (J s / m^3 when the density is a 3D density)
    m1: <m1 (d_p f0) / f0>, f0-weighted
    collision_factor: dimensionless weight of the dissipative part of the
        m0 sums relative to their coherent (mean-field) part
    """

    m0: float
    m1: float = 0.0
    collision_factor: float = 0.0


def scattering_operators(u: InteractionTensor, background, statistics: str = "bose"):
    """Left and right operators of the four scattering sums.

    Returns (L, R) such that, with the kernels' spin structure given by
    ``background``, T3 +- T4 = L rho and T1 +- T2 = rho R.
    """
    bg = _as_rho(background)
    if bg.shape != (u.dim, u.dim):
        raise ValueError(f"background shape {bg.shape} does not match tensor dimension {u.dim}")
    sign = _statistics_sign(statistics)
    U = u.u
    x1 = np.einsum("mnjl,ml->nj", U, bg)
    x2 = np.einsum("mnjl,mn->lj", U, bg)
    y3 = np.einsum("mnil,lm->in", U, bg)
    y4 = np.einsum("mnil,nm->il", U, bg)
    return y3 + sign * y4, x1 + sign * x2


def _statistics_sign(statistics: str) -> int:
    if statistics == "bose":
        return 1
    if statistics == "fermi":
        return -1
    raise ValueError(f"unknown statistics flag {statistics!r}")


def _left(a: np.ndarray) -> np.ndarray:
    return np.kron(a, np.eye(a.shape[0]))


def _right(b: np.ndarray) -> np.ndarray:
    return np.kron(np.eye(b.shape[0]), b.T)


@dataclass(frozen=True)
class SingleModeSuperOperator:
    m_matrix: np.ndarray  # 9x9, 1/s
    q: float
    statistics: str
    zeeman_block: np.ndarray = field(repr=False)
    scattering_blocks: dict = field(repr=False)
    drift_offset: float = 0.0

    @property
    def scattering_total(self) -> np.ndarray:
        return sum(self.scattering_blocks.values())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return (self.m_matrix @ rho.ravel()).reshape(rho.shape)


def assemble_single_mode(q: float, spin: SpinMatrices, u: InteractionTensor, moments_avg: AveragedMoments,
                         statistics: str = "bose", background=None, relaxation: bool = True,
                         units: Units = SI) -> SingleModeSuperOperator:
    """9x9 generator of d vec(rho)/dt.

    ``background`` is the spin structure carried by the jump kernels; the
    default is the unpolarised unit-trace state I/3.
    """
    if q < 0:
        raise ValueError(f"q must be non-negative, got {q}")
    d = spin.basis.dim
    if d != u.dim:
        raise ValueError("spin matrices and interaction tensor have different dimensions")
    hbar = units.hbar
    sz2 = spin.sz2.astype(complex)
    zeeman = -1j * q / hbar * (_left(sz2) - _right(sz2))

    if background is None:
        background = np.eye(d, dtype=complex) / d
    L, R = scattering_operators(u, background, statistics)
    c_mf = moments_avg.m0 / (2 * np.pi * hbar)
    c_f = moments_avg.m1 / (2 * np.pi * hbar)
    anti = _left(L) + _right(R)
    comm = _left(L) - _right(R)
    blocks = {
        "mean_field": -1j / hbar * c_mf * comm,
        "force": -c_f * anti,
        "relaxation": -(moments_avg.collision_factor * c_mf / hbar) * anti if relaxation
        else np.zeros((d * d, d * d), dtype=complex),
    }
    m = zeeman + sum(blocks.values())
    return SingleModeSuperOperator(m_matrix=m, q=q, statistics=statistics, zeeman_block=zeeman,
                                   scattering_blocks=blocks)


@dataclass(frozen=True)
class SingleModeModel:
    """Parameters of the single-mode equation plus the kernel-background rule.

    kernel: "isotropic" (background I/3, linear), "frozen" (background fixed
    to ``background``, linear) or "self_consistent" (background = current rho).
    """

    q: float
    spin: SpinMatrices
    u: InteractionTensor
    moments: AveragedMoments
    statistics: str = "bose"
    relaxation: bool = True
    kernel: str = "self_consistent"
    background: np.ndarray | None = None
    units: Units = SI

    def __post_init__(self):
        if self.kernel not in ("isotropic", "frozen", "self_consistent"):
            raise ValueError(f"unknown kernel mode {self.kernel!r}")
        if self.kernel == "frozen" and self.background is None:
            raise ValueError("frozen kernel mode needs a background density matrix")
        _statistics_sign(self.statistics)

    @property
    def linear(self) -> bool:
        return self.kernel != "self_consistent"

    def superoperator(self, background=None) -> SingleModeSuperOperator:
        if background is None:
            background = self.background if self.kernel == "frozen" else None
        return assemble_single_mode(self.q, self.spin, self.u, self.moments, self.statistics,
                                    background=background, relaxation=self.relaxation, units=self.units)

    def with_(self, **changes) -> "SingleModeModel":
        return replace(self, **changes)

    def rhs(self, rho: np.ndarray) -> np.ndarray:
        hbar = self.units.hbar
        if self.kernel == "self_consistent":
            bg = rho
        elif self.kernel == "frozen":
            bg = self.background
        else:
            bg = np.eye(3, dtype=complex) / 3
        L, R = scattering_operators(self.u, bg, self.statistics)
        c_mf = self.moments.m0 / (2 * np.pi * hbar)
        damp = self.moments.m1 / (2 * np.pi * hbar)
        if self.relaxation:
            damp += self.moments.collision_factor * c_mf / hbar
        h = self.q * self.spin.sz2
        lr, rr = L @ rho, rho @ R
        out = -1j / hbar * (h @ rho - rho @ h) - 1j / hbar * c_mf * (lr - rr)
        if damp:
            out -= damp * (lr + rr)
        return out


# ---------------------------------------------------------------------------
# Time evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # [t, 3, 3]
    max_presym_defect: float = 0.0

    def __post_init__(self):
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @property
    def traces(self) -> np.ndarray:
        return np.einsum("tii->t", self.states).real

    @property
    def hermiticity_defects(self) -> np.ndarray:
        return np.abs(self.states - np.conj(np.swapaxes(self.states, 1, 2))).max(axis=(1, 2))

    @property
    def populations(self) -> tuple[np.ndarray, np.ndarray]:
        pops = np.array([pair_populations(r) for r in self.states])
        return pops[:, 0], pops[:, 1]


def _generator(system) -> tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], float]]:
    """(rhs, norm-estimate) for a superoperator or a model."""
    if isinstance(system, SingleModeSuperOperator):
        M = system.m_matrix
        if not np.all(np.isfinite(M)):
            raise NumericalError("generator has non-finite entries")
        norm = np.linalg.norm(M, 2)
        return (lambda r: (M @ r.ravel()).reshape(r.shape)), (lambda r: norm)
    if isinstance(system, SingleModeModel):
        if system.linear:
            return _generator(system.superoperator())
        return system.rhs, (lambda r: np.linalg.norm(system.superoperator(background=r).m_matrix, 2))
    M = np.asarray(system)
    return _generator(SingleModeSuperOperator(M, 0.0, "bose", M, {}))


def evolve_rk4(system, rho0, dt: float, n_steps: int, sample_every: int = 1,
               stability_limit: float = 0.1) -> Trajectory:
    """Classical fixed-step RK4, re-symmetrising rho after every step."""
    rho = np.array(_as_rho(rho0), dtype=complex)
    if hermiticity_defect(rho) > 1e-10:
        raise ValueError("initial density matrix is not Hermitian")
    f, norm = _generator(system)
    stiffness = dt * norm(rho)
    if stiffness >= stability_limit:
        raise NumericalError(f"dt * ||M|| = {stiffness:.3g} exceeds the stability limit {stability_limit}")
    times, states = [0.0], [rho.copy()]
    worst = 0.0
    for step in range(1, n_steps + 1):
        k1 = f(rho)
        k2 = f(rho + 0.5 * dt * k1)
        k3 = f(rho + 0.5 * dt * k2)
        k4 = f(rho + dt * k3)
        rho = rho + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(rho)):
            raise NumericalError(f"non-finite density matrix at step {step}")
        worst = max(worst, hermiticity_defect(rho))
        rho = 0.5 * (rho + rho.conj().T)
        if step % sample_every == 0:
            times.append(step * dt)
            states.append(rho.copy())
    log.debug("rk4: %d steps, max pre-symmetrisation defect %.3e", n_steps, worst)
    return Trajectory(np.array(times), np.array(states), max_presym_defect=worst)


def evolve_eigen(system, rho0, times) -> Trajectory:
    """vec(rho(t)) = V exp(Lambda t) V^-1 vec(rho0) for a linear generator."""
    if isinstance(system, SingleModeModel):
        if not system.linear:
            raise ValueError("eigendecomposition needs a linear (isotropic or frozen) kernel")
        system = system.superoperator()
    M = system.m_matrix if isinstance(system, SingleModeSuperOperator) else np.asarray(system)
    rho0 = _as_rho(rho0)
    v0 = rho0.ravel()
    times = np.asarray(times, dtype=float)
    lam, V = scipy.linalg.eig(M)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e12:
        log.info("eigenvector condition number %.3g: falling back to expm", cond)
        states = np.array([(scipy.linalg.expm(M * t) @ v0).reshape(rho0.shape) for t in times])
    else:
        coef = np.linalg.solve(V, v0)
        states = np.einsum("ij,tj->ti", V, np.exp(np.outer(times, lam)) * coef).reshape(-1, *rho0.shape)
    return Trajectory(times, states)


# ---------------------------------------------------------------------------
# Observables
# ---------------------------------------------------------------------------

def pair_populations(rho) -> tuple[float, float]:
    """Relative populations of |1,0;1,0> and |1,+1;1,-1> by mean-field pair
    factorisation, normalised to sum to one."""
    rho = _as_rho(rho)
    tr = np.trace(rho).real
    if not tr > 0:
        return 0.0, 0.0
    d = np.diag(rho).real / tr
    p00 = d[1] ** 2
    ppm = 2 * d[0] * d[2]
    total = p00 + ppm
    if total <= 1e-12:
        return 0.0, 0.0
    return float(p00 / total), float(ppm / total)


@dataclass(frozen=True)
class OscillationResult:
    frequency: float  # Hz
    phase_difference: float  # rad in [0, 2 pi)
    decay_rate: float  # 1/s; nan when fewer than two envelope points
    amplitudes: np.ndarray = field(repr=False)  # half peak-to-peak per half period
    amplitude_times: np.ndarray = field(repr=False)


def _parabolic_vertex(y0, y1, y2):
    """Offset (in samples) and value of the vertex through three points."""
    denom = y0 - 2 * y1 + y2
    if denom == 0:
        return 0.0, y1
    off = 0.5 * (y0 - y2) / denom
    return off, y1 - 0.25 * (y0 - y2) * off


def _extrema(t, y):
    """Parabola-refined interior local maxima and minima as (time, value, kind)."""
    out = []
    dt = t[1] - t[0]
    for k in range(1, len(y) - 1):
        if y[k] > y[k - 1] and y[k] >= y[k + 1]:
            kind = 1
        elif y[k] < y[k - 1] and y[k] <= y[k + 1]:
            kind = -1
        else:
            continue
        off, val = _parabolic_vertex(y[k - 1], y[k], y[k + 1])
        out.append((t[k] + off * dt, val, kind))
    return out


def oscillation_analysis(times, p00=None, ppm=None, pad_factor: int = 16,
                         detection_ratio: float = 5.0) -> OscillationResult:
    """Dominant frequency of P00, phase of Ppm relative to P00, and the decay
    rate of the extremum envelope.

    Accepts either a Trajectory or explicit (times, p00, ppm) arrays sampled on
    a uniform grid.
    """
    if isinstance(times, Trajectory):
        p00, ppm = times.populations
        times = times.times
    t = np.asarray(times, dtype=float)
    p00 = np.asarray(p00, dtype=float)
    ppm = np.asarray(ppm, dtype=float)
    dt = t[1] - t[0]
    n = len(t)
    nfft = pad_factor * n
    x = p00 - p00.mean()
    y = ppm - ppm.mean()
    X = np.fft.rfft(x, nfft)
    Y = np.fft.rfft(y, nfft)
    mag = np.abs(X)
    k = int(np.argmax(mag[1:])) + 1
    flat = np.ptp(p00) <= 1e-12 * max(1.0, float(np.abs(p00).max()))
    if flat or not mag[k] > detection_ratio * np.median(mag):
        raise NoOscillationError("no oscillation detected")
    if 0 < k < len(mag) - 1:
        off, _ = _parabolic_vertex(mag[k - 1], mag[k], mag[k + 1])
    else:
        off = 0.0
    freq = (k + off) / (nfft * dt)
    phase = float(np.mod(np.angle(Y[k]) - np.angle(X[k]), 2 * np.pi))

    ext = _extrema(t, p00)
    amps, amp_t = [], []
    for (t1, v1, k1), (t2, v2, k2) in zip(ext, ext[1:]):
        if k1 != k2:
            amps.append(0.5 * abs(v1 - v2))
            amp_t.append(0.5 * (t1 + t2))
    amps = np.array(amps)
    amp_t = np.array(amp_t)
    good = amps > 0
    if good.sum() >= 2:
        slope = np.polyfit(amp_t[good], np.log(amps[good]), 1)[0]
        decay = float(-slope)
    else:
        decay = float("nan")
    return OscillationResult(frequency=float(freq), phase_difference=phase, decay_rate=decay,
                             amplitudes=amps, amplitude_times=amp_t)
