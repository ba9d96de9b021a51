"""Thermal gauge potentials built from the damping force.

U(1) part: scalar potential from a Poisson solve on div F0, vector potential
from the curl of F0 (Coulomb gauge).  SU(3) part: component fields by line
integration of the generator coefficients, the non-abelian field strength and
the Yang-Mills Lagrangian density.

Grids are uniform boxes; scalar fields have shape (nx, ny, nz) and vector
fields (3, nx, ny, nz).  Axis 0 is x.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.fft
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import cumulative_trapezoid

from .spin_algebra import GellMannBasis, gellmann_basis

log = logging.getLogger(__name__)

__all__ = [
    "Grid3",
    "ScalarField3",
    "VectorField3",
    "SU3GaugeField",
    "FieldStrength",
    "PoissonResult",
    "SolverError",
    "divergence",
    "curl",
    "laplacian",
    "solve_scalar_potential",
    "solve_vector_potential",
    "su3_field_from_force",
    "field_strength",
    "yang_mills_lagrangian",
    "yang_mills_lagrangian_trace",
    "potential_energy_line_integral",
    "matching_residual",
]


class SolverError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass(frozen=True)
class Grid3:
    shape: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if len(self.shape) != 3 or len(self.spacing) != 3:
            raise ValueError("grid needs three axes")
        if any(h <= 0 for h in self.spacing):
            raise ValueError(f"grid spacings must be positive, got {self.spacing}")
        if any(n < 1 for n in self.shape):
            raise ValueError(f"grid shape must be positive, got {self.shape}")

    @classmethod
    def box(cls, n: int | tuple[int, int, int], lo: float = 0.0, hi: float = 1.0) -> "Grid3":
        shape = (n, n, n) if np.isscalar(n) else tuple(n)
        return cls(tuple(int(k) for k in shape), tuple((hi - lo) / (k - 1) for k in shape), (lo, lo, lo))

    def axes(self) -> list[np.ndarray]:
        return [o + h * np.arange(n) for o, h, n in zip(self.origin, self.spacing, self.shape)]

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))


@dataclass(frozen=True)
class ScalarField3:
    grid: Grid3
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("scalar field has non-finite values")


@dataclass(frozen=True)
class VectorField3:
    grid: Grid3
    values: np.ndarray  # (3, nx, ny, nz)

    def __post_init__(self):
        if self.values.shape != (3, *self.grid.shape):
            raise ValueError(f"values shape {self.values.shape} != (3, *{self.grid.shape})")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("vector field has non-finite values")


def _d(values: np.ndarray, h: float, axis: int) -> np.ndarray:
    if values.shape[axis] < 3:
        raise ValueError(f"axis {axis} has fewer than 3 points")
    return np.gradient(values, h, axis=axis, edge_order=2)


def divergence(f: VectorField3) -> ScalarField3:
    h = f.grid.spacing
    return ScalarField3(f.grid, sum(_d(f.values[k], h[k], k) for k in range(3)))


def curl(f: VectorField3) -> VectorField3:
    h = f.grid.spacing
    fx, fy, fz = f.values
    out = np.stack([
        _d(fz, h[1], 1) - _d(fy, h[2], 2),
        _d(fx, h[2], 2) - _d(fz, h[0], 0),
        _d(fy, h[0], 0) - _d(fx, h[1], 1),
    ])
    return VectorField3(f.grid, out)


def laplacian(phi: np.ndarray, spacing) -> np.ndarray:
    """7-point Laplacian on the interior (boundary entries are zero)."""
    out = np.zeros_like(phi)
    inner = (slice(1, -1),) * 3
    for ax, h in enumerate(spacing):
        lo = [slice(1, -1)] * 3
        hi = [slice(1, -1)] * 3
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        out[inner] += (phi[tuple(lo)] - 2 * phi[inner] + phi[tuple(hi)]) / h ** 2
    return out


# ---------------------------------------------------------------------------
# Poisson solver
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoissonResult:
    potential: ScalarField3
    residual: float  # max |lap(phi) - source| over interior points
    method: str
    iterations: int = 0


def _interior_matrix(shape, spacing) -> sp.csr_matrix:
    """Negative 7-point Laplacian on the interior unknowns (SPD)."""
    mats = []
    for n, h in zip(shape, spacing):
        m = n - 2
        mats.append(sp.diags([-np.ones(m - 1), 2 * np.ones(m), -np.ones(m - 1)], [-1, 0, 1]) / h ** 2)
    eye = [sp.identity(n - 2) for n in shape]
    a = sp.kron(sp.kron(mats[0], eye[1]), eye[2])
    a = a + sp.kron(sp.kron(eye[0], mats[1]), eye[2])
    a = a + sp.kron(sp.kron(eye[0], eye[1]), mats[2])
    return a.tocsr()


def _dst_solve(rhs: np.ndarray, spacing) -> np.ndarray:
    """Solve -lap(u) = rhs on the interior with zero boundary by DST-I."""
    hat = scipy.fft.dstn(rhs, type=1)
    eig = np.zeros(rhs.shape)
    for ax, (m, h) in enumerate(zip(rhs.shape, spacing)):
        k = np.arange(1, m + 1)
        lam = (2 - 2 * np.cos(np.pi * k / (m + 1))) / h ** 2
        shape = [1, 1, 1]
        shape[ax] = m
        eig = eig + lam.reshape(shape)
    return scipy.fft.idstn(hat / eig, type=1)


def solve_scalar_potential(source: ScalarField3, boundary: np.ndarray | float | None = None,
                           method: str = "auto", tol: float = 1e-12, maxiter: int = 20000) -> PoissonResult:
    """Solve lap(phi) = source with Dirichlet data on all six faces.

    ``boundary`` is either a full array whose face entries give the Dirichlet
    values (interior entries are ignored), a constant, or None for zero.  The
    boundary is lifted into the right-hand side; the interior problem is then
    solved spectrally (``"dst"``) or by conjugate gradients (``"cg"``).
    """
    grid = source.grid
    if any(n < 3 for n in grid.shape):
        raise ValueError("Poisson solve needs at least 3 points per axis")
    phi = np.zeros(grid.shape)
    if boundary is not None:
        b = np.broadcast_to(np.asarray(boundary, dtype=float), grid.shape)
        phi[:] = b
        phi[1:-1, 1:-1, 1:-1] = 0.0
    inner = (slice(1, -1),) * 3
    # -lap(u_inner) = -source + lap(lifted boundary)
    rhs = -source.values[inner] + laplacian(phi, grid.spacing)[inner]
    if method == "auto":
        method = "dst"
    iterations = 0
    if method == "dst":
        u = _dst_solve(rhs, grid.spacing)
    elif method == "cg":
        a = _interior_matrix(grid.shape, grid.spacing)
        count = [0]

        def cb(_):
            count[0] += 1

        scale = max(1.0, float(np.abs(rhs).max()))
        u, info = spla.cg(a, rhs.ravel(), rtol=tol, atol=0.0, maxiter=maxiter, callback=cb)
        iterations = count[0]
        u = u.reshape(rhs.shape)
        if info != 0:
            res = float(np.abs(a @ u.ravel() - rhs.ravel()).max()) / scale
            raise SolverError(f"conjugate gradients did not converge in {maxiter} iterations", res)
    else:
        raise ValueError(f"unknown Poisson method {method!r}")
    phi[inner] = u
    residual = float(np.abs(laplacian(phi, grid.spacing)[inner] - source.values[inner]).max())
    log.debug("poisson %s: residual %.3e", method, residual)
    return PoissonResult(ScalarField3(grid, phi), residual, method, iterations)


def solve_vector_potential(curl_f0: VectorField3, elapsed_time: float, method: str = "auto") -> VectorField3:
    """Coulomb-gauge A with curl(A) = -t curl(F0), for time-independent F0.

    Solves lap(A) = t curl(curl F0) componentwise with zero Dirichlet data.
    """
    if elapsed_time == 0 or not np.any(curl_f0.values):
        return VectorField3(curl_f0.grid, np.zeros_like(curl_f0.values))
    div = divergence(curl_f0).values
    scale = max(float(np.abs(curl_f0.values).max()), 1e-300)
    log.debug("vector potential: max |div curl F0| / max |curl F0| = %.3e", np.abs(div).max() / scale)
    src = elapsed_time * curl(curl_f0).values
    comps = [solve_scalar_potential(ScalarField3(curl_f0.grid, src[k]), method=method).potential.values
             for k in range(3)]
    return VectorField3(curl_f0.grid, np.stack(comps))


# ---------------------------------------------------------------------------
# SU(3) fields
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SU3GaugeField:
    grid: Grid3
    components: np.ndarray  # (8, 4, nx, ny, nz): color a, spacetime index mu
    coupling: float = 1.0
    previous: np.ndarray | None = field(default=None, repr=False)  # earlier time slice
    dt: float | None = None

    def __post_init__(self):
        if self.components.shape != (8, 4, *self.grid.shape):
            raise ValueError(f"components shape {self.components.shape} != (8, 4, *{self.grid.shape})")
        if not np.all(np.isfinite(self.components)):
            raise ValueError("gauge field has non-finite values")
        if self.previous is not None and (self.dt is None or self.dt <= 0):
            raise ValueError("a previous time slice needs a positive dt")


@dataclass(frozen=True)
class FieldStrength:
    grid: Grid3
    f_tensor: np.ndarray  # (8, 4, 4, nx, ny, nz), antisymmetric in the two middle axes
    has_time_derivative: bool = False


def su3_field_from_force(su3_components: np.ndarray, positions: np.ndarray, grid_shape=(None, 3, 3),
                         coupling: float = 1.0, transverse_spacing: float | None = None) -> SU3GaugeField:
    """A^a_x(x) = -(1/e) int_0^x c_a dx', extruded along y and z.

    ``su3_components`` is [R, 9] (c0, c1..c8) or [R, 8].  The 1D force axis is
    the grid x axis; the trapezoid integral starts at the first position.
    """
    if coupling == 0:
        raise ValueError("coupling constant e must be nonzero")
    c = np.asarray(su3_components, dtype=float)
    if c.shape[1] == 9:
        c = c[:, 1:]
    if c.shape[1] != 8:
        raise ValueError(f"expected 8 or 9 components per point, got {c.shape[1]}")
    x = np.asarray(positions, dtype=float)
    nx = len(x)
    ny, nz = grid_shape[1], grid_shape[2]
    dx = float(x[1] - x[0])
    hy = transverse_spacing or dx
    grid = Grid3((nx, ny, nz), (dx, hy, hy), (float(x[0]), 0.0, 0.0))
    ax = -cumulative_trapezoid(c, x, axis=0, initial=0.0) / coupling  # [R, 8]
    comps = np.zeros((8, 4, nx, ny, nz))
    comps[:, 1] = ax.T[:, :, None, None]
    return SU3GaugeField(grid, comps, coupling)


def field_strength(a: SU3GaugeField, f_abc: np.ndarray | None = None) -> FieldStrength:
    """F^a_{mu nu} = d_mu A^a_nu - d_nu A^a_mu + e f_abc A^b_mu A^c_nu.

    Spatial derivatives are central differences.  The time row is set from a
    backward difference when a previous slice is present, otherwise it is zero.
    """
    if f_abc is None:
        f_abc = gellmann_basis().structure_constants
    A = a.components
    h = a.grid.spacing
    d = np.zeros((8, 4, 4, *a.grid.shape))  # d[a, mu, nu] = d_mu A^a_nu
    for mu in (1, 2, 3):
        n = a.grid.shape[mu - 1]
        if n >= 3:
            d[:, mu] = np.gradient(A, h[mu - 1], axis=mu + 1, edge_order=2)
        elif n == 2:
            d[:, mu] = np.gradient(A, h[mu - 1], axis=mu + 1)
    timed = a.previous is not None
    if timed:
        d[:, 0] = (A - a.previous) / a.dt
    abelian = d - np.swapaxes(d, 1, 2)
    if a.coupling:
        nonab = a.coupling * np.einsum("abc,bm...,cn...->amn...", f_abc, A, A)
    else:
        nonab = 0.0
    return FieldStrength(a.grid, abelian + nonab, has_time_derivative=timed)


def _metric(minkowski: bool) -> np.ndarray:
    return np.array([-1.0, 1.0, 1.0, 1.0]) if minkowski else np.ones(4)


def yang_mills_lagrangian(f: FieldStrength, minkowski: bool = False) -> ScalarField3:
    """L = -(1/8) sum_{mu nu} sum_a (F^a_{mu nu})^2 (Euclidean by default)."""
    g = _metric(minkowski)
    w = np.outer(g, g)
    vals = -0.125 * np.einsum("mn,amn...->...", w, f.f_tensor ** 2)
    return ScalarField3(f.grid, vals)


def yang_mills_lagrangian_trace(f: FieldStrength, basis: GellMannBasis | None = None,
                                minkowski: bool = False) -> ScalarField3:
    """Same density by explicit matrix traces, -1/4 sum Tr(F_{mu nu} F_{mu nu})."""
    basis = basis or gellmann_basis()
    g = _metric(minkowski)
    mats = np.einsum("amn...,aij->mn...ij", f.f_tensor, basis.generators)
    tr = np.einsum("mn...ij,mn...ji->mn...", mats, mats).real
    vals = -0.25 * np.einsum("m,n,mn...->...", g, g, tr)
    return ScalarField3(f.grid, vals)


def potential_energy_line_integral(su3_components: np.ndarray, positions: np.ndarray,
                                   coupling: float = 1.0) -> np.ndarray:
    """V(x) = e int_0^x sum_a c_a(x') T_a dx' as a [R, 3, 3] matrix field."""
    c = np.asarray(su3_components, dtype=float)
    if c.shape[1] == 9:
        c = c[:, 1:]
    integ = cumulative_trapezoid(c, positions, axis=0, initial=0.0)
    return coupling * np.einsum("ra,aij->rij", integ, gellmann_basis().generators)


def matching_residual(potential: np.ndarray, lagrangian_1d: np.ndarray) -> np.ndarray:
    """Diagnostic residual -V - L I at each position; the kinetic side of the
    matching condition is omitted because its operator is undefined."""
    eye = np.eye(potential.shape[-1])
    return -potential - lagrangian_1d[:, None, None] * eye
