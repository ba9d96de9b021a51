"""Oracle suites run by ``spinboltz validate``.

Each suite compares a production code path against an independent
construction and reports the largest defect seen.  ``structure_constants``
lets a caller inject a (possibly corrupted) f_abc table to confirm the
algebra suite notices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import gauge as gg
from .equilibrium import derivative
from .spin_algebra import (build_interaction_tensor, clebsch_gordan, gellmann_basis, jacobi_defect,
                           make_spin_matrices, spin_basis, su3_decompose, su3_reconstruct)
from .transport import (AveragedMoments, SingleModeModel, assemble_single_mode, evolve_eigen, evolve_rk4,
                        initial_state, kernel_contraction)
from .units import REDUCED

__all__ = ["SuiteResult", "SUITES", "racah_cg", "closed_form_tensor", "channel_sum_tensor", "run_validate",
           "format_report"]


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    defect: float
    detail: str = ""


def racah_cg(j1, m1, j2, m2, J, M) -> float:
    """Clebsch-Gordan coefficient from the Racah closed-form sum."""
    j1, m1, j2, m2, J, M = (Fraction(x).limit_denominator(4) for x in (j1, m1, j2, m2, J, M))
    if m1 + m2 != M or abs(m1) > j1 or abs(m2) > j2 or abs(M) > J:
        return 0.0
    if J < abs(j1 - j2) or J > j1 + j2:
        return 0.0
    fact = lambda x: math.factorial(int(x))  # noqa: E731
    pre = Fraction((2 * J + 1) * fact(J + j1 - j2) * fact(J - j1 + j2) * fact(j1 + j2 - J), fact(j1 + j2 + J + 1))
    pre *= fact(J + M) * fact(J - M) * fact(j1 - m1) * fact(j1 + m1) * fact(j2 - m2) * fact(j2 + m2)
    total = Fraction(0)
    for k in range(int(j1 + j2 - J) + 1):
        args = (k, j1 + j2 - J - k, j1 - m1 - k, j2 + m2 - k, J - j2 + m1 + k, J - j1 - m2 + k)
        if min(args) < 0:
            continue
        total += Fraction((-1) ** k, math.prod(fact(a) for a in args))
    return math.sqrt(pre) * float(total)


def channel_sum_tensor(g0: float, g2: float) -> np.ndarray:
    """Direct double loop over S in {0, 2} and M using the Racah oracle."""
    ms = (1, 0, -1)
    u = np.zeros((3, 3, 3, 3))
    for S, g in ((0, g0), (2, g2)):
        for M in range(-S, S + 1):
            for i, mi in enumerate(ms):
                for k, mk in enumerate(ms):
                    a = racah_cg(1, mi, 1, mk, S, M)
                    if a == 0:
                        continue
                    for j, mj in enumerate(ms):
                        for l, ml in enumerate(ms):
                            u[i, j, k, l] += g * a * racah_cg(1, mj, 1, ml, S, M)
    return u


def _spin1_vector() -> np.ndarray:
    r = 1 / math.sqrt(2)
    sx = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    sy = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]])
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return np.array([sx, sy, sz])


def closed_form_tensor(g0: float, g2: float) -> np.ndarray:
    """c0 delta_ij delta_kl + c2 S_ij . S_kl, symmetrised over the ket pair.

    The bare closed form also weights the odd S = 1 channel; averaging over
    j <-> l projects that part out.
    """
    c0 = (g0 + 2 * g2) / 3
    c2 = (g2 - g0) / 3
    eye = np.eye(3)
    S = _spin1_vector()
    raw = c0 * np.einsum("ij,kl->ijkl", eye, eye) + c2 * np.einsum("aij,akl->ijkl", S, S).real
    return 0.5 * (raw + raw.transpose(0, 3, 2, 1))


# ---------------------------------------------------------------------------
# suites
# ---------------------------------------------------------------------------

def suite_racah(**_) -> SuiteResult:
    worst = 0.0
    vals = (1, 0, -1)
    for m1 in vals:
        for m2 in vals:
            for S in (0, 1, 2):
                for M in range(-S, S + 1):
                    worst = max(worst, abs(clebsch_gordan(1, m1, 1, m2, S, M) - racah_cg(1, m1, 1, m2, S, M)))
    half = (Fraction(1, 2), Fraction(-1, 2))
    for m1 in half:
        for m2 in half:
            for S in (0, 1):
                for M in range(-S, S + 1):
                    worst = max(worst, abs(clebsch_gordan(0.5, m1, 0.5, m2, S, M)
                                           - racah_cg(0.5, m1, 0.5, m2, S, M)))
    return SuiteResult("racah", worst < 1e-13, worst, "spin-1 x spin-1 and spin-1/2 x spin-1/2")


def suite_contraction(seed: int = 0, **_) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    basis = spin_basis(1)
    for _ in range(5):
        g0, g2 = rng.normal(size=2)
        u = build_interaction_tensor(basis, {0: g0, 2: g2})
        worst = max(worst, np.abs(u.u - channel_sum_tensor(g0, g2)).max(),
                    np.abs(u.u - closed_form_tensor(g0, g2)).max())
        h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        rho = h @ h.conj().T
        brute = np.zeros((3, 3), dtype=complex)
        for i in range(3):
            for n in range(3):
                brute[i, n] = sum(u.u[m, n, i, l] * rho[l, m] for m in range(3) for l in range(3))
        worst = max(worst, np.abs(kernel_contraction(u, rho) - brute).max())
    return SuiteResult("contraction", worst < 1e-12, worst, "tensor vs channel sum and closed form")


def suite_roundtrip(seed: int = 0, **_) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = a + a.conj().T
        worst = max(worst, np.abs(su3_reconstruct(*su3_decompose(h)) - h).max())
    return SuiteResult("roundtrip", worst < 1e-12, worst, "100 random Hermitian matrices")


def suite_algebra(structure_constants: np.ndarray | None = None, **_) -> SuiteResult:
    basis = gellmann_basis()
    f = basis.structure_constants if structure_constants is None else np.asarray(structure_constants)
    T = basis.generators
    jac = jacobi_defect(f)
    comm = np.einsum("aij,bjk->abik", T, T) - np.einsum("bij,ajk->abik", T, T)
    comm_defect = float(np.abs(comm - 1j * np.einsum("abc,cik->abik", f, T)).max())
    worst = max(jac, comm_defect)
    return SuiteResult("jacobi", jac < 1e-12 and comm_defect < 1e-13, worst,
                       f"jacobi {jac:.2e}, commutator {comm_defect:.2e}")


def suite_fermi(seed: int = 0, **_) -> SuiteResult:
    rng = np.random.default_rng(seed)
    spin = make_spin_matrices(1)
    basis = spin_basis(1)
    worst = 0.0
    for _ in range(100):
        g0, g2 = rng.uniform(-1, 1, size=2) * 10 ** rng.uniform(-3, 3)
        u = build_interaction_tensor(basis, {0: g0, 2: g2})
        mom = AveragedMoments(*rng.normal(size=2), collision_factor=rng.uniform())
        a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        op = assemble_single_mode(rng.uniform(0, 2), spin, u, mom, "fermi", background=a @ a.conj().T)
        worst = max(worst, float(np.abs(op.scattering_total).max()))
    return SuiteResult("fermi", worst < 1e-14, worst, "100 random tensors and moments")


def _order(errors) -> float:
    e = np.asarray(errors)
    return float(np.mean(np.log2(e[:-1] / e[1:])))


def suite_convergence(**_) -> SuiteResult:
    # stencil: derivative of a smooth function including one-sided edges
    errs = []
    for n in (33, 65, 129):
        x = np.linspace(0, 1, n)
        errs.append(np.abs(derivative(np.sin(3 * x), x[1] - x[0]) - 3 * np.cos(3 * x)).max())
    stencil = _order(errs)

    # Poisson: error against a fine-grid reference
    def solve(n):
        grid = gg.Grid3.box(n, 0.0, 1.0)
        X, Y, Z = grid.mesh()
        src = gg.ScalarField3(grid, np.exp(X) * np.sin(2 * Y) * (1 + Z ** 2))
        return gg.solve_scalar_potential(src).potential.values

    ref = solve(129)
    perr = []
    for n in (17, 33):
        st = 128 // (n - 1)
        perr.append(np.abs(solve(n) - ref[::st, ::st, ::st]).max())
    poisson = _order(perr)

    # RK4 against the eigen solution of a linear generator
    spin = make_spin_matrices(1)
    u = build_interaction_tensor(spin_basis(1), {0: 1.0, 2: 0.7})
    rho0 = initial_state(0.1)
    model = SingleModeModel(q=1.0, spin=spin, u=u, moments=AveragedMoments(2 * np.pi, 0.0, 0.05),
                            kernel="frozen", background=rho0.rho, units=REDUCED)
    rerr = []
    for dt in (0.04, 0.02):
        n = int(round(8 / dt))
        tr = evolve_rk4(model, rho0, dt, n)
        ex = evolve_eigen(model, rho0, tr.times)
        rerr.append(np.abs(tr.states - ex.states).max())
    rk4 = _order(rerr)
    ok = 1.8 <= stencil <= 2.2 and 1.8 <= poisson <= 2.2 and 3.8 <= rk4 <= 4.2
    return SuiteResult("convergence", ok, max(rerr[-1], perr[-1], errs[-1]),
                       f"orders: stencil {stencil:.2f}, poisson {poisson:.2f}, rk4 {rk4:.2f}")


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "racah": suite_racah,
    "contraction": suite_contraction,
    "roundtrip": suite_roundtrip,
    "jacobi": suite_algebra,
    "fermi": suite_fermi,
    "convergence": suite_convergence,
}


def run_validate(suites=None, structure_constants: np.ndarray | None = None) -> list[SuiteResult]:
    names = list(SUITES) if not suites else list(suites)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    return [SUITES[n](structure_constants=structure_constants) for n in names]


def format_report(results: list[SuiteResult]) -> str:
    lines = [f"{'suite':<12} {'status':<6} {'max defect':>11}  detail"]
    for r in results:
        lines.append(f"{r.name:<12} {'PASS' if r.passed else 'FAIL':<6} {r.defect:>11.3e}  {r.detail}")
    return "\n".join(lines)
