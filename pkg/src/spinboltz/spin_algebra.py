"""Spin matrices, Clebsch-Gordan coefficients, the two-body interaction
tensor and the SU(3) (Gell-Mann) generator basis.

Index convention: magnetic quantum numbers are ordered from +s down to -s,
so for s = 1 the basis is (+1, 0, -1).  Spin matrices are returned in units
of hbar (hbar = 1 inside this module).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping

import numpy as np

__all__ = [
    "SpinBasis",
    "SpinMatrices",
    "GellMannBasis",
    "InteractionTensor",
    "spin_basis",
    "make_spin_matrices",
    "ladder_matrices",
    "clebsch_gordan",
    "build_interaction_tensor",
    "interaction_from_scattering_lengths",
    "gellmann_basis",
    "su3_decompose",
    "su3_reconstruct",
    "jacobi_defect",
]


def _twice(x) -> int:
    """Return 2x as an int, raising if x is not a half-integer."""
    two = Fraction(x).limit_denominator(1000) * 2
    if two.denominator != 1 or abs(float(two) - 2 * float(x)) > 1e-12:
        raise ValueError(f"{x!r} is not a half-integer")
    return int(two)


@dataclass(frozen=True)
class SpinBasis:
    s: Fraction
    dim: int
    m_values: tuple[Fraction, ...]


def spin_basis(s) -> SpinBasis:
    two_s = _twice(s)
    if two_s < 0:
        raise ValueError(f"spin must be non-negative, got {s!r}")
    s = Fraction(two_s, 2)
    m_values = tuple(s - k for k in range(two_s + 1))
    return SpinBasis(s=s, dim=two_s + 1, m_values=m_values)


@dataclass(frozen=True)
class SpinMatrices:
    basis: SpinBasis
    sz: np.ndarray
    sz2: np.ndarray


def make_spin_matrices(s) -> SpinMatrices:
    """Diagonal S_z and S_z^2 (units of hbar and hbar^2)."""
    basis = spin_basis(s)
    m = np.array([float(v) for v in basis.m_values])
    sz = np.diag(m)
    sz2 = np.diag(m * m)
    sz.setflags(write=False)
    sz2.setflags(write=False)
    return SpinMatrices(basis=basis, sz=sz, sz2=sz2)


def ladder_matrices(s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cartesian spin matrices (S_x, S_y, S_z) in the descending-m basis."""
    basis = spin_basis(s)
    sf = float(basis.s)
    m = np.array([float(v) for v in basis.m_values])
    # S_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; m+1 sits one row above m
    splus = np.zeros((basis.dim, basis.dim))
    for k in range(1, basis.dim):
        splus[k - 1, k] = np.sqrt(sf * (sf + 1) - m[k] * (m[k] + 1))
    sx = 0.5 * (splus + splus.T)
    sy = -0.5j * (splus - splus.T)
    return sx.astype(complex), sy, np.diag(m).astype(complex)


# ---------------------------------------------------------------------------
# Clebsch-Gordan coefficients by explicit construction of the coupled basis
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _coupled_table(two_j1: int, two_j2: int) -> dict[tuple[int, int], np.ndarray]:
    """Coupled states |J M> expanded in the product basis |m1>|m2>.

    Built from the stretched state by repeated lowering, with each new
    multiplet's top state taken orthogonal to all higher-J states of the same
    M.  The Condon-Shortley phase fixes <j1 j1; j2 (J - j1)|J J> > 0.
    Keys are (2J, 2M); values are vectors of length (2j1+1)(2j2+1) with the
    product index ordered as k1 * d2 + k2 (descending m in each factor).
    """
    j1, j2 = two_j1 / 2, two_j2 / 2
    d1, d2 = two_j1 + 1, two_j2 + 1
    m1 = j1 - np.arange(d1)
    m2 = j2 - np.arange(d2)

    def lower(j, m):
        op = np.zeros((len(m), len(m)))
        for k in range(len(m) - 1):
            op[k + 1, k] = np.sqrt(j * (j + 1) - m[k] * (m[k] - 1))
        return op

    jminus = np.kron(lower(j1, m1), np.eye(d2)) + np.kron(np.eye(d1), lower(j2, m2))
    mtot = (m1[:, None] + m2[None, :]).ravel()

    table: dict[tuple[int, int], np.ndarray] = {}
    for two_J in range(two_j1 + two_j2, abs(two_j1 - two_j2) - 1, -2):
        J = two_J / 2
        subspace = np.flatnonzero(np.isclose(mtot, J))
        top = np.zeros(d1 * d2)
        # start from the product state with the largest m1 in this M sector
        top[subspace[0]] = 1.0
        for two_Jh in range(two_j1 + two_j2, two_J, -2):
            other = table[(two_Jh, two_J)]
            top -= other * (other @ top)
        top /= np.linalg.norm(top)
        # product index of |m1 = j1, m2 = J - j1>
        if top[(two_j1 + two_j2 - two_J) // 2] < 0:
            top = -top
        vec = top
        table[(two_J, two_J)] = vec
        for two_M in range(two_J - 2, -two_J - 1, -2):
            M = (two_M + 2) / 2
            vec = jminus @ vec / np.sqrt(J * (J + 1) - M * (M - 1))
            table[(two_J, two_M)] = vec
    return table


def clebsch_gordan(j1, m1, j2, m2, S, M) -> float:
    """<j1 m1; j2 m2 | S M> with the Condon-Shortley phase convention.

    Arguments are half-integers (ints, floats or Fractions).  Couplings that
    violate a selection rule return 0.
    """
    tj1, tm1, tj2, tm2, tS, tM = (_twice(x) for x in (j1, m1, j2, m2, S, M))
    if min(tj1, tj2, tS) < 0:
        return 0.0
    if abs(tm1) > tj1 or abs(tm2) > tj2 or abs(tM) > tS:
        return 0.0
    if (tj1 - tm1) % 2 or (tj2 - tm2) % 2 or (tS - tM) % 2:
        return 0.0
    if tm1 + tm2 != tM:
        return 0.0
    if not abs(tj1 - tj2) <= tS <= tj1 + tj2 or (tj1 + tj2 - tS) % 2:
        return 0.0
    vec = _coupled_table(tj1, tj2)[(tS, tM)]
    k1 = (tj1 - tm1) // 2
    k2 = (tj2 - tm2) // 2
    return float(vec[k1 * (tj2 + 1) + k2])


# ---------------------------------------------------------------------------
# Interaction tensor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InteractionTensor:
    """U[i, j, k, l] with (i, k) the bra pair and (j, l) the ket pair.

    Nonzero only for m_i + m_k = m_j + m_l.
    """

    u: np.ndarray
    basis: SpinBasis
    channel_strengths: Mapping[int, float]
    scattering_lengths: Mapping[int, float] | None = None
    mass: float | None = None

    @property
    def dim(self) -> int:
        return self.basis.dim

    def scaled(self, factor: float) -> "InteractionTensor":
        return InteractionTensor(
            u=self.u * factor,
            basis=self.basis,
            channel_strengths={S: g * factor for S, g in self.channel_strengths.items()},
            scattering_lengths=self.scattering_lengths,
            mass=self.mass,
        )


def build_interaction_tensor(basis: SpinBasis, channel_strengths: Mapping[int, float]) -> InteractionTensor:
    """Sum of even total-spin channels, g_S * sum_M <ik|SM><SM|jl>."""
    two_s = int(2 * basis.s)
    max_S = two_s  # total spin of two spin-s particles runs 0..2s
    even = set(range(0, max_S + 1, 2))
    if any(int(S) != S for S in channel_strengths):
        raise ValueError("channel keys must be integers")
    keys = {int(S) for S in channel_strengths}
    odd = sorted(S for S in keys if S % 2)
    if odd:
        raise ValueError(f"odd total-spin channels are not allowed for bosons: {odd}")
    missing = sorted(even - keys)
    if missing:
        raise ValueError(f"missing channel strengths for S = {missing}")
    extra = sorted(keys - even)
    if extra:
        raise ValueError(f"channels {extra} are outside 0..{max_S}")

    d = basis.dim
    s = basis.s
    u = np.zeros((d, d, d, d))
    for S in sorted(keys):
        g = float(channel_strengths[S])
        if g == 0.0:
            continue
        for M in range(-S, S + 1):
            # column of CG coefficients indexed by the pair (a, b)
            cg = np.array([[clebsch_gordan(s, ma, s, mb, S, M) for mb in basis.m_values]
                           for ma in basis.m_values])
            u += g * np.einsum("ik,jl->ijkl", cg, cg)
    u.setflags(write=False)
    return InteractionTensor(u=u, basis=basis,
                             channel_strengths={S: float(channel_strengths[S]) for S in sorted(keys)})


def interaction_from_scattering_lengths(basis: SpinBasis, scattering_lengths: Mapping[int, float],
                                        mass: float, hbar: float) -> InteractionTensor:
    """Channel strengths g_S = 4 pi hbar^2 a_S / m."""
    strengths = {S: 4 * np.pi * hbar ** 2 * a / mass for S, a in scattering_lengths.items()}
    t = build_interaction_tensor(basis, strengths)
    return InteractionTensor(u=t.u, basis=basis, channel_strengths=t.channel_strengths,
                             scattering_lengths=dict(scattering_lengths), mass=mass)


# ---------------------------------------------------------------------------
# SU(3)
# ---------------------------------------------------------------------------

_S3 = np.sqrt(3.0)

# nonzero f_abc for a < b < c (1-based), T_a = lambda_a / 2
_F_TABLE = {
    (1, 2, 3): 1.0,
    (1, 4, 7): 0.5,
    (1, 5, 6): -0.5,
    (2, 4, 6): 0.5,
    (2, 5, 7): 0.5,
    (3, 4, 5): 0.5,
    (3, 6, 7): -0.5,
    (4, 5, 8): _S3 / 2,
    (6, 7, 8): _S3 / 2,
}


def _gellmann_lambdas() -> np.ndarray:
    lam = np.zeros((8, 3, 3), dtype=complex)
    lam[0][0, 1] = lam[0][1, 0] = 1
    lam[1][0, 1], lam[1][1, 0] = -1j, 1j
    lam[2][0, 0], lam[2][1, 1] = 1, -1
    lam[3][0, 2] = lam[3][2, 0] = 1
    lam[4][0, 2], lam[4][2, 0] = -1j, 1j
    lam[5][1, 2] = lam[5][2, 1] = 1
    lam[6][1, 2], lam[6][2, 1] = -1j, 1j
    lam[7] = np.diag([1, 1, -2]) / _S3
    return lam


def _antisymmetric_table() -> np.ndarray:
    f = np.zeros((8, 8, 8))
    for (a, b, c), v in _F_TABLE.items():
        a, b, c = a - 1, b - 1, c - 1
        for (x, y, z), sgn in (((a, b, c), 1), ((b, c, a), 1), ((c, a, b), 1),
                               ((b, a, c), -1), ((a, c, b), -1), ((c, b, a), -1)):
            f[x, y, z] = sgn * v
    return f


@dataclass(frozen=True)
class GellMannBasis:
    identity: np.ndarray
    generators: np.ndarray  # shape (8, 3, 3), T_a = lambda_a / 2
    structure_constants: np.ndarray = field(repr=False)  # shape (8, 8, 8)


def gellmann_basis() -> GellMannBasis:
    gens = _gellmann_lambdas() / 2
    f = _antisymmetric_table()
    for arr in (gens, f):
        arr.setflags(write=False)
    return GellMannBasis(identity=np.eye(3, dtype=complex), generators=gens, structure_constants=f)


_BASIS = gellmann_basis()


def su3_decompose(h: np.ndarray, tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Coefficients (c0, c) with h = c0 I + sum_a c_a T_a."""
    h = np.asarray(h)
    if h.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {h.shape}")
    scale = max(1.0, float(np.abs(h).max()))
    defect = float(np.abs(h - h.conj().T).max())
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    c0 = float(np.trace(h).real / 3)
    c = 2 * np.einsum("aij,ji->a", _BASIS.generators, h).real
    return c0, c


def su3_reconstruct(c0: float, c) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    return c0 * np.eye(3, dtype=complex) + np.einsum("a,aij->ij", c, _BASIS.generators)


def jacobi_defect(f: np.ndarray) -> float:
    """max |sum_e f_abe f_ecd + f_cbe f_aed + f_dbe f_ace| over all a, b, c, d."""
    t1 = np.einsum("abe,ecd->abcd", f, f)
    t2 = np.einsum("cbe,aed->abcd", f, f)
    t3 = np.einsum("dbe,ace->abcd", f, f)
    return float(np.abs(t1 + t2 + t3).max())
