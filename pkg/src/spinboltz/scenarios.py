"""End-to-end runs behind the CLI: spin dynamics (populations), the damping
force at several temperatures, and the gauge-potential pipeline."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gauge as gg
from .config import ScenarioConfig
from .equilibrium import (EquilibriumDistribution, PhaseSpaceGrid, ThermalProfile, TrapConfig,
                          bose_equilibrium, chemical_potential_for_occupancy, jump_moments, local_density,
                          momentum_cutoff, phase_space_average)
from .io import atomic_write, read_csv, svg_line_plot, write_csv, write_field
from .spin_algebra import (InteractionTensor, SpinMatrices, interaction_from_scattering_lengths,
                           make_spin_matrices, spin_basis, su3_decompose)
from .transport import (AveragedMoments, NoOscillationError, OscillationResult, SingleModeModel,
                        Trajectory, damping_force, evolve_eigen, evolve_rk4, initial_state,
                        oscillation_analysis)
from .units import Units, get_units

log = logging.getLogger(__name__)

__all__ = ["Setup", "setup", "thermal_state", "averaged_moments", "build_model", "simulate_trajectory",
           "SimulateResult", "DampingResult", "GaugeResult", "run_simulate", "run_damping", "run_gauge",
           "analytic_poisson_check"]


@dataclass(frozen=True)
class Setup:
    units: Units
    trap: TrapConfig
    grid: PhaseSpaceGrid
    spin: SpinMatrices
    u: InteractionTensor
    q: float
    chemical_potential: float
    density_scale: float  # 3D density per unit of the 1D equilibrium density

    @property
    def reduced(self) -> bool:
        return self.units.reduced


def setup(cfg: ScenarioConfig) -> Setup:
    cfg.validate()
    units = get_units(cfg.physics.units)
    if units.reduced:
        mass, omega = 1.0, 1.0
        lengths = {0: cfg.physics.a0_bohr, 2: cfg.physics.a2_bohr}  # already in oscillator lengths
    else:
        mass, omega = cfg.physics.mass, cfg.physics.omega
        lengths = cfg.physics.scattering_lengths
    trap = TrapConfig(omega=omega, mass=mass)
    t_max = max(cfg.thermal.temperatures + (cfg.dynamics.temperature,))
    grid = PhaseSpaceGrid.build(cfg.grid.position_min, cfg.grid.position_max, cfg.grid.position_points,
                                momentum_cutoff(mass, t_max, units), cfg.grid.momentum_points)
    mu = cfg.thermal.chemical_potential
    if mu is None:
        mu = chemical_potential_for_occupancy(trap, grid, t_max, cfg.thermal.peak_occupancy, units)
    basis = spin_basis(1)
    u = interaction_from_scattering_lengths(basis, lengths, mass, units.hbar)
    n_ref = local_density(bose_equilibrium(grid, trap, _profile(cfg, grid, t_max, mu), units=units), grid, units)
    return Setup(units=units, trap=trap, grid=grid, spin=make_spin_matrices(1), u=u,
                 q=cfg.physics.q_hz * units.h, chemical_potential=mu,
                 density_scale=cfg.density.peak / float(n_ref.max()))


def _profile(cfg: ScenarioConfig, grid: PhaseSpaceGrid, temperature: float, mu: float) -> ThermalProfile:
    if cfg.thermal.profile_table:
        # a table fixes the shape; the requested temperature rescales it to that maximum
        prof = ThermalProfile.from_table(cfg.thermal.profile_table, grid, mu)
        return ThermalProfile(prof.temperature * temperature / prof.temperature.max(), mu)
    return ThermalProfile.constant(temperature, grid, mu)


def thermal_state(cfg: ScenarioConfig, st: Setup, temperature: float) -> tuple[EquilibriumDistribution, np.ndarray]:
    """Equilibrium distribution and the 3D density (m^-3) at one temperature."""
    f0 = bose_equilibrium(st.grid, st.trap, _profile(cfg, st.grid, temperature, st.chemical_potential),
                          units=st.units)
    R = st.grid.positions
    prof = cfg.density.profile
    if prof == "equilibrium":
        n = st.density_scale * local_density(f0, st.grid, st.units)
    elif prof == "constant":
        n = np.full(len(R), cfg.density.peak)
    else:
        n = cfg.density.peak + cfg.density.gradient * (R - R[0])
    return f0, n


def averaged_moments(cfg: ScenarioConfig, st: Setup) -> AveragedMoments:
    """f0-weighted averages of m0 and of m1 * (d_p f0)/f0 at the dynamics temperature."""
    f0, n = thermal_state(cfg, st, cfg.dynamics.temperature)
    jm = jump_moments(n, st.grid.positions, side=-1, units=st.units)
    v = f0.values
    dlog = np.gradient(v, st.grid.dp, axis=1) / np.where(v > 0, v, 1.0)
    m0 = phase_space_average(f0, jm.m0)
    m1 = phase_space_average(f0, jm.m1[:, None] * dlog)
    kappa = cfg.dynamics.relaxation_factor if cfg.dynamics.relaxation else 0.0
    return AveragedMoments(m0=m0, m1=m1, collision_factor=kappa)


def build_model(cfg: ScenarioConfig, st: Setup | None = None) -> SingleModeModel:
    st = st or setup(cfg)
    d = cfg.dynamics
    rho0 = initial_state(d.epsilon).rho
    return SingleModeModel(q=st.q, spin=st.spin, u=st.u, moments=averaged_moments(cfg, st),
                           statistics=d.statistics, relaxation=d.relaxation, kernel=d.kernel,
                           background=rho0 if d.kernel == "frozen" else None, units=st.units)


def simulate_trajectory(cfg: ScenarioConfig, model: SingleModeModel, t_end: float) -> Trajectory:
    d = cfg.dynamics
    n_steps = int(round(t_end / d.dt))
    rho0 = initial_state(d.epsilon)
    if d.integrator == "eigen":
        times = np.arange(0, n_steps + 1, d.sample_every) * d.dt
        return evolve_eigen(model, rho0, times)
    return evolve_rk4(model, rho0, d.dt, n_steps, sample_every=d.sample_every)


def _suffix(st: Setup, si: str) -> str:
    return "red" if st.reduced else si


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

@dataclass
class SimulateResult:
    trajectory: Trajectory
    analysis: OscillationResult | None
    message: str
    files: list[Path] = field(default_factory=list)


def run_simulate(cfg: ScenarioConfig, out_dir: str | Path | None = None, svg: bool | None = None) -> SimulateResult:
    cfg.validate(require_periods=cfg.physics.q_hz > 0)
    st = setup(cfg)
    model = build_model(cfg, st)
    traj = simulate_trajectory(cfg, model, cfg.dynamics.t_max)
    p00, ppm = traj.populations
    try:
        res = oscillation_analysis(traj.times, p00, ppm)
        freq_unit = "1/time" if st.reduced else "Hz"
        message = (f"frequency = {res.frequency:.4f} {freq_unit}\n"
                   f"phase difference = {res.phase_difference:.4f} rad\n"
                   f"decay rate = {res.decay_rate:.4g} 1/{'time' if st.reduced else 's'}")
    except NoOscillationError as exc:
        res, message = None, str(exc)
    files = []
    if out_dir is not None:
        out = Path(out_dir)
        header = [f"time_{_suffix(st, 's')}", "p00", "ppm", "trace", "hermiticity_defect"]
        rows = zip(traj.times, p00, ppm, traj.traces, traj.hermiticity_defects)
        files.append(write_csv(out / "populations.csv", header, rows))
        if svg if svg is not None else cfg.output.svg:
            plot = svg_line_plot([("P00", traj.times, p00), ("P+-", traj.times, ppm)],
                                 header[0], "relative pair population", "pair populations")
            files.append(atomic_write(out / "populations.svg", plot))
    return SimulateResult(traj, res, message, files)


# ---------------------------------------------------------------------------
# damping
# ---------------------------------------------------------------------------

@dataclass
class DampingResult:
    positions: np.ndarray
    temperatures: np.ndarray
    force: np.ndarray  # [T, R, 3, 3]
    su3_components: np.ndarray  # [T, R, 9]
    rho: np.ndarray
    files: list[Path] = field(default_factory=list)

    @property
    def f11(self) -> np.ndarray:
        return self.force[:, :, 0, 0].real


_IDX = ("1", "2", "3")


def force_header(st: Setup) -> list[str]:
    unit = _suffix(st, "N")
    cols = [f"position_{_suffix(st, 'm')}", f"temperature_{_suffix(st, 'K')}", f"f11_{unit}"]
    for i in range(3):
        for j in range(3):
            cols += [f"f{_IDX[i]}{_IDX[j]}_re_{unit}", f"f{_IDX[i]}{_IDX[j]}_im_{unit}"]
    return cols


def run_damping(cfg: ScenarioConfig, temperatures=None, t_eval: float | None = None,
                out_dir: str | Path | None = None, svg: bool | None = None) -> DampingResult:
    if temperatures is not None:
        cfg = cfg.override(**{"thermal.temperatures": tuple(float(t) for t in temperatures)})
    if t_eval is not None:
        cfg = cfg.override(**{"damping.t_eval": float(t_eval)})
    st = setup(cfg)
    model = build_model(cfg, st)
    rho = simulate_trajectory(cfg, model, cfg.damping.t_eval).states[-1]
    temps = np.array(cfg.thermal.temperatures)
    forces, comps = [], []
    for T in temps:
        _, n = thermal_state(cfg, st, T)
        df = damping_force(st.u, jump_moments(n, st.grid.positions, side=-1, units=st.units), rho, st.units)
        forces.append(df.f_matrix)
        comps.append(df.su3_components)
    result = DampingResult(st.grid.positions, temps, np.array(forces), np.array(comps), rho)
    if out_dir is not None:
        out = Path(out_dir)
        rows = []
        for k, T in enumerate(temps):
            for r, R in enumerate(result.positions):
                f = result.force[k, r]
                rows.append([R, T, f[0, 0].real] + [v for z in f.ravel() for v in (z.real, z.imag)])
        result.files.append(write_csv(out / "force.csv", force_header(st), rows))
        if svg if svg is not None else cfg.output.svg:
            plot = svg_line_plot([(f"T = {T:.3g}", result.positions, result.f11[k]) for k, T in enumerate(temps)],
                                 force_header(st)[0], force_header(st)[2], "damping force, first component")
            result.files.append(atomic_write(out / "force.svg", plot))
    return result


def load_damping(path: str | Path) -> DampingResult:
    """Read ``force.csv`` written by run_damping (file or directory)."""
    path = Path(path)
    if path.is_dir():
        path = path / "force.csv"
    header, data = read_csv(path)
    if len(header) != 21:
        raise ValueError(f"{path}: expected 21 columns, got {len(header)}")
    temps = np.unique(data[:, 1])
    positions = np.unique(data[:, 0])
    force = np.zeros((len(temps), len(positions), 3, 3), dtype=complex)
    for k, T in enumerate(temps):
        block = data[data[:, 1] == T]
        block = block[np.argsort(block[:, 0])]
        vals = block[:, 3::2] + 1j * block[:, 4::2]
        force[k] = vals.reshape(-1, 3, 3)
    comps = np.array([[np.r_[su3_decompose(f)[0], su3_decompose(f)[1]] for f in fk] for fk in force])
    return DampingResult(positions, temps, force, comps, rho=np.full((3, 3), np.nan))


# ---------------------------------------------------------------------------
# gauge
# ---------------------------------------------------------------------------

@dataclass
class GaugeResult:
    positions: np.ndarray
    temperature: float
    su3_components: np.ndarray  # [R, 9]
    phi: np.ndarray  # 3D
    vector_potential: np.ndarray  # (3, 3D)
    lagrangian: np.ndarray  # 3D
    poisson_residual: float
    matching_residual: np.ndarray  # [R], max-norm of -V - L I
    analytic_error: float
    files: list[Path] = field(default_factory=list)

    @property
    def centre(self) -> tuple[int, int]:
        return self.phi.shape[1] // 2, self.phi.shape[2] // 2


def analytic_poisson_check(n: int = 17) -> float:
    """Max error on the built-in quadratic case lap(phi) = 3, phi = |x|^2/2."""
    grid = gg.Grid3.box(n, -1.0, 1.0)
    X, Y, Z = grid.mesh()
    exact = 0.5 * (X ** 2 + Y ** 2 + Z ** 2)
    res = gg.solve_scalar_potential(gg.ScalarField3(grid, np.full(grid.shape, 3.0)), exact)
    return float(np.abs(res.potential.values - exact).max())


def run_gauge(cfg: ScenarioConfig, damping: DampingResult | None = None, out_dir: str | Path | None = None,
              svg: bool | None = None) -> GaugeResult:
    if damping is None:
        damping = run_damping(cfg)
    T = cfg.gauge.temperature
    k = int(np.argmax(damping.temperatures)) if T is None else int(np.argmin(np.abs(damping.temperatures - T)))
    comps = damping.su3_components[k]
    x = damping.positions
    e = cfg.gauge.coupling
    nt = cfg.gauge.transverse_points
    dx = float(x[1] - x[0])
    grid = gg.Grid3((len(x), nt, nt), (dx, dx, dx), (float(x[0]), 0.0, 0.0))

    f0 = np.zeros((3, *grid.shape))
    f0[0] = comps[:, 0][:, None, None]
    f0 = gg.VectorField3(grid, f0)
    div = gg.divergence(f0)
    pois = gg.solve_scalar_potential(div)
    scale = max(1.0, float(np.abs(div.values).max()))
    a_vec = gg.solve_vector_potential(gg.curl(f0), cfg.gauge.elapsed_time)

    su3 = gg.su3_field_from_force(comps, x, grid_shape=grid.shape, coupling=e)
    lag = gg.yang_mills_lagrangian(gg.field_strength(su3), minkowski=cfg.gauge.minkowski).values
    cy, cz = nt // 2, nt // 2
    pot = gg.potential_energy_line_integral(comps, x, e)
    match = np.abs(gg.matching_residual(pot, lag[:, cy, cz])).max(axis=(1, 2))
    result = GaugeResult(x, float(damping.temperatures[k]), comps, pois.potential.values, a_vec.values, lag,
                         pois.residual / scale, match, analytic_poisson_check())
    if out_dir is not None:
        out = Path(out_dir)
        red = cfg.physics.units == "reduced"
        u = (lambda s: "red" if red else s)
        header = ([f"position_{u('m')}", f"phi_{u('J')}", f"Ax_{u('Ns')}", f"Ay_{u('Ns')}", f"Az_{u('Ns')}"]
                  + [f"c{a}_{u('N')}" for a in range(9)]
                  + [f"lagrangian_{u('N2')}", "matching_residual_mixed"])
        rows = [[x[r], result.phi[r, cy, cz], *result.vector_potential[:, r, cy, cz], *comps[r],
                 lag[r, cy, cz], match[r]] for r in range(len(x))]
        result.files.append(write_csv(out / "potentials.csv", header, rows))
        spacing = grid.spacing
        result.files += write_field(out / "fields" / "phi", result.phi, spacing, u("J"), grid.origin)
        result.files += write_field(out / "fields" / "vector_potential", result.vector_potential, spacing,
                                    u("N s"), grid.origin)
        result.files += write_field(out / "fields" / "lagrangian", lag, spacing, u("N^2"), grid.origin)
        summary = (f"temperature = {result.temperature!r}\n"
                   f"poisson_residual = {result.poisson_residual!r}\n"
                   f"matching_residual_max = {float(match.max())!r}\n"
                   f"analytic_check_error = {result.analytic_error!r}\n")
        result.files.append(atomic_write(out / "gauge_summary.txt", summary))
        if svg if svg is not None else cfg.output.svg:
            plot = svg_line_plot([(f"c{a}", x, comps[:, a]) for a in range(9)], header[0], "component",
                                 "generator components of the damping force")
            result.files.append(atomic_write(out / "su3_components.svg", plot))
    return result
