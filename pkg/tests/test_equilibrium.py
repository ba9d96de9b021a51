import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spinboltz.equilibrium import (PhaseSpaceGrid, TailCutoffWarning, ThermalProfile, TrapConfig,
                                   EquilibriumDistribution, bose_equilibrium,
                                   chemical_potential_for_occupancy, jump_moments, liouville_residual,
                                   local_density, momentum_cutoff, phase_space_average)
from spinboltz.units import REDUCED, SI

MASS = 1.4431e-25
OMEGA = 2 * np.pi * 15
T0 = 10e-6


@pytest.fixture
def trap():
    return TrapConfig(omega=OMEGA, mass=MASS)


def make_grid(n_pos=101, n_mom=257, r_max=3e-4, temperature=T0):
    return PhaseSpaceGrid.build(-r_max, r_max, n_pos, momentum_cutoff(MASS, temperature), n_mom)


def polylog_half(z, terms=50):
    k = np.arange(1, terms + 1)
    return float(np.sum(z ** k / np.sqrt(k)))


def test_trap_validation():
    with pytest.raises(ValueError):
        TrapConfig(omega=0.0, mass=1.0)
    with pytest.raises(ValueError):
        TrapConfig(omega=1.0, mass=-1.0)
    with pytest.raises(ValueError):
        TrapConfig(omega=1.0, mass=1.0, dimension=4)


def test_grid_rejects_nonuniform_and_asymmetric():
    with pytest.raises(ValueError):
        PhaseSpaceGrid(np.array([0.0, 1.0, 3.0]), np.linspace(-1, 1, 5))
    with pytest.raises(ValueError):
        PhaseSpaceGrid(np.linspace(0, 1, 5), np.linspace(-1, 2, 5))


def test_grid_build_keeps_zero_momentum():
    g = PhaseSpaceGrid.build(0, 1, 5, 2.0, 10)
    assert len(g.momenta) == 11 and g.momenta[5] == 0.0


def test_profile_rejects_nonpositive_temperature():
    with pytest.raises(ValueError):
        ThermalProfile(np.array([1.0, 0.0]), -1.0)


def test_boltzmann_limit(trap):
    grid = make_grid()
    mu = -np.log(1e7) * SI.k_B * T0  # exp(mu / kT) ~ 1e-7
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    eps = grid.momenta[None, :] ** 2 / (2 * MASS) + trap.potential(grid.positions)[:, None]
    boltz = np.exp(-(eps - mu) / (SI.k_B * T0))
    assert np.abs(f.values / boltz - 1).max() < 1e-5


def test_momentum_symmetry_and_positivity(trap):
    grid = make_grid()
    mu = chemical_potential_for_occupancy(trap, grid, T0)
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    assert np.all(f.values >= 0)
    assert np.abs(f.values - f.values[:, ::-1]).max() <= 1e-13 * f.values.max()


def test_peak_occupancy_rule(trap):
    grid = make_grid()
    mu = chemical_potential_for_occupancy(trap, grid, T0, occupancy=0.1)
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    assert f.values.max() == pytest.approx(0.1, rel=1e-12)


def test_bose_divergence_is_an_error(trap):
    grid = make_grid()
    with pytest.raises(ValueError, match="diverges"):
        bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, 1e-35))


def test_fermi_flag(trap):
    grid = make_grid()
    mu = 0.5 * SI.k_B * T0
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu), statistics="fermi")
    assert f.values.max() < 1.0


@pytest.mark.parametrize("z", [0.05, 0.3, 0.5])
def test_homogeneous_density_polylog(z):
    # a vanishing trap frequency makes the gas homogeneous
    flat = TrapConfig(omega=1e-12, mass=MASS)
    grid = PhaseSpaceGrid.build(0.0, 1e-4, 5, momentum_cutoff(MASS, T0), 2001)
    mu = np.log(z) * SI.k_B * T0
    n = local_density(bose_equilibrium(grid, flat, ThermalProfile.constant(T0, grid, mu)), grid)
    expected = np.sqrt(2 * np.pi * MASS * SI.k_B * T0) / (2 * np.pi * SI.hbar) * polylog_half(z)
    assert np.abs(n / expected - 1).max() < 1e-6


def test_boltzmann_density_gaussian_integral(trap):
    grid = make_grid()
    mu = np.log(1e-10) * SI.k_B * T0
    n = local_density(bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu)), grid)
    x = (trap.potential(grid.positions) - mu) / (SI.k_B * T0)
    expected = np.exp(-x) * np.sqrt(2 * np.pi * MASS * SI.k_B * T0) / (2 * np.pi * SI.hbar)
    assert np.abs(n / expected - 1).max() < 1e-8


def test_density_zero_and_linear():
    grid = make_grid()
    zero = EquilibriumDistribution(np.zeros((len(grid.positions), len(grid.momenta))), "bose")
    assert np.all(local_density(zero, grid) == 0)
    rng = np.random.default_rng(0)
    vals = rng.uniform(size=zero.values.shape) * np.exp(-np.linspace(-8, 8, len(grid.momenta)) ** 2)[None, :]
    one = local_density(EquilibriumDistribution(vals, "bose"), grid)
    two = local_density(EquilibriumDistribution(2 * vals, "bose"), grid)
    assert np.array_equal(two, 2 * one)


def test_tail_cutoff_warning(trap):
    grid = PhaseSpaceGrid.build(-1e-4, 1e-4, 11, 0.5 * np.sqrt(MASS * SI.k_B * T0), 33)
    mu = chemical_potential_for_occupancy(trap, grid, T0)
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    with pytest.warns(TailCutoffWarning):
        local_density(f, grid)


def test_no_tail_warning_with_default_cutoff(trap):
    grid = make_grid()
    mu = chemical_potential_for_occupancy(trap, grid, T0)
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    with warnings.catch_warnings():
        warnings.simplefilter("error", TailCutoffWarning)
        local_density(f, grid)


def test_density_bit_reproducible(trap):
    grid = make_grid()
    mu = chemical_potential_for_occupancy(trap, grid, T0)
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    assert np.array_equal(local_density(f, grid), local_density(f, grid))


def test_temperature_monotonicity(trap):
    grid = make_grid(temperature=12e-6)
    mu = chemical_potential_for_occupancy(trap, grid, 12e-6)
    dens = [local_density(bose_equilibrium(grid, trap, ThermalProfile.constant(T, grid, mu)), grid)
            for T in (8e-6, 9e-6, 10e-6, 11e-6)]
    assert all(np.all(b > a) for a, b in zip(dens, dens[1:]))


def test_profile_from_table(tmp_path, trap):
    grid = make_grid()
    path = tmp_path / "temps.txt"
    path.write_text("# position temperature\n-3e-4 9e-6\n3e-4 11e-6\n")
    prof = ThermalProfile.from_table(path, grid, -1e-30)
    assert prof.temperature[0] == pytest.approx(9e-6)
    assert prof.temperature[-1] == pytest.approx(11e-6)
    assert prof.temperature[len(grid.positions) // 2] == pytest.approx(10e-6)


def test_liouville_residual_second_order(trap):
    # reduced units keep both stencil errors comparable
    t = TrapConfig(omega=1.0, mass=1.0)
    errs = []
    for n in (41, 81, 161):
        grid = PhaseSpaceGrid.build(-3, 3, n, 6, n)
        prof = ThermalProfile.constant(1.0, grid, -1.0)
        f = bose_equilibrium(grid, t, prof, units=REDUCED)
        errs.append(np.abs(liouville_residual(f, grid, t)).max())
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 3.5) & (ratios < 4.5))


# --- jump moments ------------------------------------------------------------------

def test_constant_density_has_no_first_moment():
    x = np.linspace(0, 1e-4, 41)
    jm = jump_moments(np.full(41, 3e18), x)
    assert np.abs(jm.m1).max() <= 1e-10 * np.abs(jm.m0).max()


def test_m0_identity():
    x = np.linspace(-1e-4, 1e-4, 81)
    n = 1e18 * np.exp(-(x / 5e-5) ** 2) + 1e17
    jm = jump_moments(n, x)
    assert np.abs(jm.m0 / n / (2 * np.pi * SI.hbar) - 1).max() < 1e-10


def test_linear_density_first_moment():
    x = np.linspace(0, 1e-4, 41)
    g = 2e21
    for side, sign in ((-1, -1), (1, 1)):
        jm = jump_moments(1e18 + g * x, x, side=side)
        # stored m1 = (2 / i hbar) * (+- i pi hbar^2 n')
        assert np.allclose(jm.m1, sign * 2 * np.pi * SI.hbar * g, rtol=1e-10, atol=0)
        quad = jump_moments(1e18 + g * x, x, side=side, mode="quadrature")
        assert np.abs(quad.m1 / jm.m1 - 1).max() < 1e-4
        assert np.abs(quad.m0 / jm.m0 - 1).max() < 1e-4


def test_quadrature_agrees_on_smooth_density():
    # taper bias ~ (dR / sigma)^2 / 8, so sigma spans ~50 grid cells
    x = np.linspace(-3e-4, 3e-4, 321)
    n = 1e18 * np.exp(-0.5 * (x / 1e-4) ** 2)
    a = jump_moments(n, x, mode="analytic")
    q = jump_moments(n, x, mode="quadrature")
    assert np.abs(q.m0 - a.m0).max() < 1e-4 * np.abs(a.m0).max()
    assert np.abs(q.m1 - a.m1).max() < 1e-4 * np.abs(a.m1).max()


def test_jump_moments_reject_nonuniform():
    with pytest.raises(ValueError):
        jump_moments(np.ones(4), np.array([0.0, 1.0, 2.0, 4.0]))


def test_jump_moments_unknown_mode():
    with pytest.raises(ValueError):
        jump_moments(np.ones(4), np.arange(4.0), mode="magic")


@given(a=st.floats(-5, 5), b=st.floats(-5, 5), seed=st.integers(0, 2 ** 16))
def test_moment_linearity(a, b, seed):
    rng = np.random.default_rng(seed)
    x = np.linspace(0, 1, 21)
    n1, n2 = rng.normal(size=(2, 21))
    combo = jump_moments(a * n1 + b * n2, x, units=REDUCED)
    m1, m2 = jump_moments(n1, x, units=REDUCED), jump_moments(n2, x, units=REDUCED)
    assert np.allclose(combo.m0, a * m1.m0 + b * m2.m0, atol=1e-12)
    assert np.allclose(combo.m1, a * m1.m1 + b * m2.m1, atol=1e-10)


def test_phase_space_average_constant_field(trap):
    grid = make_grid()
    mu = chemical_potential_for_occupancy(trap, grid, T0)
    f = bose_equilibrium(grid, trap, ThermalProfile.constant(T0, grid, mu))
    assert phase_space_average(f, np.full(len(grid.positions), 2.5)) == pytest.approx(2.5, rel=1e-14)
    # odd-in-p fields average to zero on the symmetric grid
    odd = np.broadcast_to(grid.momenta[None, :], f.values.shape)
    assert abs(phase_space_average(f, odd)) < 1e-12 * grid.momenta.max()
