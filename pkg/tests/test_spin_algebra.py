from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from spinboltz.spin_algebra import (build_interaction_tensor, clebsch_gordan, gellmann_basis, jacobi_defect,
                                    ladder_matrices, make_spin_matrices, spin_basis, su3_decompose,
                                    su3_reconstruct)
from spinboltz.validation import channel_sum_tensor, closed_form_tensor, racah_cg

from conftest import random_hermitian

M1 = (1, 0, -1)
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


# --- spin basis and matrices ------------------------------------------------

@pytest.mark.parametrize("s, dim", [(0, 1), (0.5, 2), (1, 3), (1.5, 4), (2, 5)])
def test_spin_basis_invariants(s, dim):
    b = spin_basis(s)
    assert b.dim == dim
    m = np.array([float(v) for v in b.m_values])
    assert m[0] == s and m[-1] == -s
    assert np.allclose(np.diff(m), -1.0)


def test_spin_one_matrices():
    sm = make_spin_matrices(1)
    assert np.array_equal(np.diag(sm.sz), [1, 0, -1])
    assert np.array_equal(np.diag(sm.sz2), [1, 0, 1])
    assert np.array_equal(sm.sz2, sm.sz @ sm.sz)


def test_spin_half_matrices():
    assert np.array_equal(np.diag(make_spin_matrices(0.5).sz), [0.5, -0.5])


@pytest.mark.parametrize("bad", [-1, 0.3, 1.25, -0.5])
def test_rejects_bad_spin(bad):
    with pytest.raises(ValueError):
        make_spin_matrices(bad)


@pytest.mark.parametrize("s", [0.5, 1, 1.5, 2])
def test_ladder_commutators(s):
    sx, sy, sz = ladder_matrices(s)
    assert np.allclose(sx @ sy - sy @ sx, 1j * sz, atol=1e-14)
    d = int(2 * s + 1)
    casimir = sx @ sx + sy @ sy + sz @ sz
    assert np.allclose(casimir, s * (s + 1) * np.eye(d), atol=1e-13)


# --- Clebsch-Gordan ------------------------------------------------------------

def test_cg_stretched_state():
    assert clebsch_gordan(1, 1, 1, 1, 2, 2) == pytest.approx(1.0, abs=1e-15)


def test_cg_selection_rule():
    assert clebsch_gordan(1, 1, 1, 0, 2, 0) == 0.0
    assert clebsch_gordan(1, 1, 1, 1, 1, 1) == 0.0


def test_cg_singlet_from_racah():
    expected = racah_cg(1, 0, 1, 0, 0, 0)
    assert expected == pytest.approx(-1 / np.sqrt(3), abs=1e-15)
    assert clebsch_gordan(1, 0, 1, 0, 0, 0) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("j1, j2", [(1, 1), (0.5, 0.5), (1, 0.5), (1.5, 1), (2, 1)])
def test_cg_matches_racah(j1, j2):
    worst = 0.0
    for m1 in np.arange(-j1, j1 + 1):
        for m2 in np.arange(-j2, j2 + 1):
            for J in np.arange(abs(j1 - j2), j1 + j2 + 1):
                for M in np.arange(-J, J + 1):
                    worst = max(worst, abs(clebsch_gordan(j1, m1, j2, m2, J, M) - racah_cg(j1, m1, j2, m2, J, M)))
    assert worst < 1e-13


def test_cg_racah_known_values():
    # <1/2 1/2; 1/2 -1/2 | 0 0> = 1/sqrt 2 and <1 1; 1 -1 | 2 0> = 1/sqrt 6
    assert racah_cg(Fraction(1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(-1, 2), 0, 0) == pytest.approx(
        1 / np.sqrt(2), abs=1e-15)
    assert racah_cg(1, 1, 1, -1, 2, 0) == pytest.approx(1 / np.sqrt(6), abs=1e-15)


def test_cg_column_orthonormality():
    pairs = [(m1, m2) for m1 in M1 for m2 in M1]
    states = [(S, M) for S in (0, 1, 2) for M in range(-S, S + 1)]
    c = np.array([[clebsch_gordan(1, m1, 1, m2, S, M) for (S, M) in states] for (m1, m2) in pairs])
    assert np.abs(c.T @ c - np.eye(9)).max() < 1e-13


def test_coupled_basis_completeness():
    total = np.zeros((3, 3, 3, 3))
    for S in (0, 1, 2):
        for M in range(-S, S + 1):
            cg = np.array([[clebsch_gordan(1, a, 1, b, S, M) for b in M1] for a in M1])
            total += np.einsum("ik,jl->ijkl", cg, cg)
    expected = np.einsum("ij,kl->ijkl", np.eye(3), np.eye(3))
    assert np.abs(total - expected).max() < 1e-13


# --- interaction tensor ---------------------------------------------------------

def test_tensor_pure_quintet_corner():
    u = build_interaction_tensor(spin_basis(1), {0: 0.0, 2: 2.5})
    assert u.u[0, 0, 0, 0] == pytest.approx(2.5, abs=1e-15)


@given(g0=finite, g2=finite)
def test_tensor_matches_channel_sum_and_closed_form(g0, g2):
    u = build_interaction_tensor(spin_basis(1), {0: g0, 2: g2}).u
    scale = max(1.0, abs(g0), abs(g2))
    assert np.abs(u - channel_sum_tensor(g0, g2)).max() < 1e-12 * scale
    assert np.abs(u - closed_form_tensor(g0, g2)).max() < 1e-12 * scale


def test_bare_closed_form_differs_by_odd_channel():
    # without symmetrisation the closed form carries a spurious S = 1 weight c0 - c2
    g0, g2 = 1.0, 0.0
    c0, c2 = (g0 + 2 * g2) / 3, (g2 - g0) / 3
    r = 1 / np.sqrt(2)
    S = np.array([r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]),
                  r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]]),
                  np.diag([1.0, 0, -1])])
    bare = c0 * np.einsum("ij,kl->ijkl", np.eye(3), np.eye(3)) + c2 * np.einsum("aij,akl->ijkl", S, S).real
    proj1 = np.zeros((3, 3, 3, 3))
    for M in (-1, 0, 1):
        cg = np.array([[clebsch_gordan(1, a, 1, b, 1, M) for b in M1] for a in M1])
        proj1 += np.einsum("ik,jl->ijkl", cg, cg)
    u = build_interaction_tensor(spin_basis(1), {0: g0, 2: g2}).u
    assert np.abs(bare - u - (c0 - c2) * proj1).max() < 1e-13


@given(g0=finite, g2=finite)
def test_tensor_invariants(g0, g2):
    u = build_interaction_tensor(spin_basis(1), {0: g0, 2: g2}).u
    scale = max(1.0, abs(g0), abs(g2))
    m = np.array(M1)
    mask = (m[:, None, None, None] + m[None, None, :, None]) != (m[None, :, None, None] + m[None, None, None, :])
    assert np.all(u[mask] == 0)
    assert np.abs(u - u.transpose(2, 1, 0, 3)).max() < 1e-13 * scale
    assert np.abs(u - u.transpose(0, 3, 2, 1)).max() < 1e-13 * scale
    assert np.isrealobj(u)


def test_tensor_spin_two_channels():
    u = build_interaction_tensor(spin_basis(2), {0: 1.0, 2: 0.5, 4: 0.25}).u
    assert u.shape == (5, 5, 5, 5)
    assert np.abs(u - u.transpose(0, 3, 2, 1)).max() < 1e-13


@pytest.mark.parametrize("channels", [{0: 1.0, 1: 1.0, 2: 1.0}, {0: 1.0}, {0: 1.0, 2: 1.0, 4: 1.0}, {0.5: 1.0, 2: 1.0}])
def test_tensor_rejects_bad_channels(channels):
    with pytest.raises(ValueError):
        build_interaction_tensor(spin_basis(1), channels)


# --- SU(3) ----------------------------------------------------------------------

def test_gellmann_invariants():
    b = gellmann_basis()
    T = b.generators
    assert T.shape == (8, 3, 3)
    assert np.abs(T - np.conj(np.swapaxes(T, 1, 2))).max() == 0
    assert np.abs(np.einsum("aii->a", T)).max() < 1e-14
    gram = np.einsum("aij,bji->ab", T, T)
    assert np.abs(gram - 0.5 * np.eye(8)).max() < 1e-15
    comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
    assert np.abs(comm - 1j * np.einsum("abc,cik->abik", b.structure_constants, T)).max() < 1e-13


def test_structure_constants_from_commutator_projection():
    b = gellmann_basis()
    T = b.generators
    comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
    oracle = (-2j * np.einsum("abij,cji->abc", comm, T)).real
    assert np.abs(oracle - b.structure_constants).max() < 1e-14
    assert b.structure_constants[0, 1, 2] == 1.0


def test_structure_constants_antisymmetric_and_jacobi():
    f = gellmann_basis().structure_constants
    assert np.array_equal(f, -f.transpose(1, 0, 2))
    assert np.array_equal(f, -f.transpose(0, 2, 1))
    assert jacobi_defect(f) < 1e-12


def test_jacobi_detects_sign_error():
    f = gellmann_basis().structure_constants.copy()
    f[0, 1, 2] *= -1
    assert jacobi_defect(f) > 0.1


def test_decompose_examples():
    c0, c = su3_decompose(np.eye(3))
    assert c0 == pytest.approx(1.0) and np.abs(c).max() < 1e-15
    c0, c = su3_decompose(np.diag([1.0, -1.0, 0.0]))
    assert c0 == 0.0
    assert c[2] == pytest.approx(2.0, abs=1e-15)
    assert np.abs(np.delete(c, 2)).max() < 1e-15


def test_reconstruct_examples():
    assert np.abs(su3_reconstruct(0.0, np.zeros(8))).max() == 0
    assert np.array_equal(su3_reconstruct(1.0, np.zeros(8)), np.eye(3))


def test_decompose_rejects_non_hermitian():
    with pytest.raises(ValueError):
        su3_decompose(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]], dtype=complex))


def test_round_trip_random(rng):
    worst = max(np.abs(su3_reconstruct(*su3_decompose(h)) - h).max()
                for h in (random_hermitian(rng) for _ in range(100)))
    assert worst < 1e-12


@given(arrays(np.float64, 9, elements=finite))
def test_reconstruct_then_decompose(coeffs):
    c0, c = su3_decompose(su3_reconstruct(coeffs[0], coeffs[1:]))
    assert c0 == pytest.approx(coeffs[0], abs=1e-12 * max(1, np.abs(coeffs).max()))
    assert np.abs(c - coeffs[1:]).max() <= 1e-12 * max(1, np.abs(coeffs).max())
