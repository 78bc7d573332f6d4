"""Hamiltonian and observable matrices in explicit bases.

Bases
-----
``ChargeBasis(n_max)``
    Cooper-pair number states |-n_max>, ..., |n_max>.
``BoundedGrid(x_max, n_points)``
    Interior points of [-x_max, x_max] with Dirichlet walls at both ends,
    spacing ``2 x_max / (n_points + 1)``.  Derivatives are second-order
    central differences.
``PeriodicGrid(n_points, twist)``
    Points ``2 pi k / n_points`` on the circle.  Functions obey
    ``u(x + 2 pi) = exp(-2 pi i twist) u(x)``.  The kinetic operator is the
    Fourier (spectral) second derivative built from the twisted plane waves
    ``exp(i (m - twist) x)``; first derivatives are central differences with
    the twist phase on the wrap-around couplings.
``ProductBasis(theta, phi)``
    Tensor product, row-major over (theta index, phi index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.sparse as sp

from .core import (
    TWO_PI,
    FluxoniumParams,
    TransmonParams,
    ZeroPiParams,
    validate,
)
from .errors import DimensionTooSmall, DomainTooSmall, UnsupportedObservable

DENSE_LIMIT = 4096
HERMITIAN_RTOL = 1e-12

# Relative perturbation of the finite-difference off-diagonals.  Only the
# self-check's negative control sets this.
_STENCIL_FAULT = 0.0


@dataclass(frozen=True)
class ChargeBasis:
    n_max: int

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise DimensionTooSmall(f"charge basis needs n_max >= 1, got {self.n_max}")

    @property
    def dim(self) -> int:
        return 2 * self.n_max + 1

    @property
    def weight(self) -> float:
        return 1.0

    @property
    def charges(self) -> np.ndarray:
        return np.arange(-self.n_max, self.n_max + 1, dtype=float)


@dataclass(frozen=True)
class BoundedGrid:
    x_max: float
    n_points: int

    def __post_init__(self):
        if not self.x_max > 0:
            raise DomainTooSmall(f"x_max must be > 0, got {self.x_max}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DimensionTooSmall(f"bounded grid needs n_points >= 3, got {self.n_points}")

    @property
    def dim(self) -> int:
        return self.n_points

    @property
    def spacing(self) -> float:
        return 2.0 * self.x_max / (self.n_points + 1)

    @property
    def weight(self) -> float:
        return self.spacing

    @property
    def points(self) -> np.ndarray:
        return -self.x_max + self.spacing * np.arange(1, self.n_points + 1)


@dataclass(frozen=True)
class PeriodicGrid:
    n_points: int
    twist: float = 0.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise DimensionTooSmall(f"periodic grid needs n_points >= 3, got {self.n_points}")

    @property
    def dim(self) -> int:
        return self.n_points

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n_points

    @property
    def weight(self) -> float:
        return self.spacing

    @property
    def points(self) -> np.ndarray:
        return TWO_PI * np.arange(self.n_points) / self.n_points


@dataclass(frozen=True)
class ProductBasis:
    theta: PeriodicGrid
    phi: BoundedGrid

    @property
    def dim(self) -> int:
        return self.theta.dim * self.phi.dim

    @property
    def weight(self) -> float:
        return self.theta.weight * self.phi.weight

    @property
    def shape(self) -> tuple[int, int]:
        return (self.theta.dim, self.phi.dim)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates (theta, phi) on the product grid, flattened row-major."""
        theta, phi = np.meshgrid(self.theta.points, self.phi.points, indexing="ij")
        return theta.ravel(), phi.ravel()


BasisSpec = Union[ChargeBasis, BoundedGrid, PeriodicGrid, ProductBasis]
GRID_BASES = (BoundedGrid, PeriodicGrid, ProductBasis)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A Hermitian matrix tied to the basis it was assembled in.

    ``potential`` holds the diagonal potential on the grid when the operator
    is a Hamiltonian, so that wavefunction exports can overlay it.
    """

    basis: BasisSpec
    matrix: np.ndarray | sp.csr_matrix
    potential: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.matrix.shape != (self.basis.dim, self.basis.dim):
            raise ValueError(
                f"matrix shape {self.matrix.shape} does not match basis dimension {self.basis.dim}"
            )

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v

    def max_abs(self) -> float:
        if self.is_sparse:
            return float(abs(self.matrix).max()) if self.matrix.nnz else 0.0
        return float(np.max(np.abs(self.matrix)))

    def hermiticity_defect(self) -> float:
        """max |H - H^dagger| relative to max |H|."""
        diff = self.matrix - self.matrix.conj().T
        if sp.issparse(diff):
            worst = float(abs(diff).max()) if diff.nnz else 0.0
        else:
            worst = float(np.max(np.abs(diff)))
        scale = self.max_abs()
        return worst / scale if scale > 0 else worst


def _finalize(basis, matrix, potential=None) -> HermitianOperator:
    """Symmetrize and choose storage: dense below DENSE_LIMIT, CSR above."""
    if sp.issparse(matrix):
        matrix = sp.csr_matrix(matrix)
        matrix = (matrix + matrix.conj().T) * 0.5
        if basis.dim < DENSE_LIMIT:
            matrix = matrix.toarray()
        else:
            matrix = sp.csr_matrix(matrix)
            matrix.sum_duplicates()
    else:
        matrix = 0.5 * (matrix + matrix.conj().T)
        if basis.dim >= DENSE_LIMIT:
            matrix = sp.csr_matrix(matrix)
    if np.iscomplexobj(matrix):
        imag = matrix.imag
        if (abs(imag).max() if sp.issparse(imag) else np.max(np.abs(imag))) == 0.0:
            matrix = matrix.real
    return HermitianOperator(basis, matrix, potential)


# ---------------------------------------------------------------------------
# Discrete derivatives


def second_difference(grid: BoundedGrid) -> sp.csr_matrix:
    """-d^2/dx^2 by central differences with Dirichlet walls."""
    n, h = grid.n_points, grid.spacing
    off = -(1.0 + _STENCIL_FAULT) * np.ones(n - 1) / h**2
    return sp.diags([off, 2.0 * np.ones(n) / h**2, off], [-1, 0, 1], format="csr")


def periodic_second_difference(grid: PeriodicGrid) -> np.ndarray:
    """-d^2/dx^2 by central differences with twisted wrap-around couplings."""
    n, h = grid.n_points, grid.spacing
    phase = np.exp(-2j * math.pi * grid.twist)
    mat = np.zeros((n, n), dtype=complex)
    idx = np.arange(n)
    mat[idx, idx] = 2.0 / h**2
    off = -(1.0 + _STENCIL_FAULT) / h**2
    mat[idx[:-1], idx[:-1] + 1] = off
    mat[idx[:-1] + 1, idx[:-1]] = off
    mat[n - 1, 0] = off * phase
    mat[0, n - 1] = off * np.conj(phase)
    return mat


def spectral_second_derivative(grid: PeriodicGrid) -> np.ndarray:
    """-d^2/dx^2 from the twisted Fourier modes exp(i (m - twist) x).

    The retained wavenumbers are the ``n_points`` integers centred on
    ``twist``, so the operator is unitarily equivalent to a truncated
    charge basis with kinetic term (m - twist)^2.
    """
    n = grid.n_points
    centre = int(round(grid.twist))
    m = centre + np.arange(-(n // 2), n - n // 2, dtype=float)
    k = m - grid.twist
    modes = np.exp(1j * np.outer(grid.points, k)) / math.sqrt(n)
    mat = (modes * k**2) @ modes.conj().T
    if grid.twist == 0.0:
        return np.ascontiguousarray(mat.real)
    return mat


def first_difference(grid: BoundedGrid | PeriodicGrid) -> np.ndarray | sp.csr_matrix:
    """-i d/dx by central differences (twisted wrap on periodic grids)."""
    n, h = grid.n_points, grid.spacing
    c = -1j / (2.0 * h)
    if isinstance(grid, BoundedGrid):
        ones = np.ones(n - 1)
        return sp.diags([-c * ones, c * ones], [-1, 1], format="csr")
    phase = np.exp(-2j * math.pi * grid.twist)
    mat = np.zeros((n, n), dtype=complex)
    idx = np.arange(n - 1)
    mat[idx, idx + 1] = c
    mat[idx + 1, idx] = -c
    mat[n - 1, 0] = c * phase
    mat[0, n - 1] = -c * np.conj(phase)
    return mat


# ---------------------------------------------------------------------------
# Default resolutions


def default_n_max(params: TransmonParams) -> int:
    ratio = params.e_j / params.e_c
    return max(30, math.ceil(5.0 * ratio**0.25 + abs(params.n_g)))


DEFAULT_GRID = BoundedGrid(12.0, 800)
DEFAULT_PERIODIC_POINTS = 512
DEFAULT_ZEROPI_BASIS = ProductBasis(PeriodicGrid(96), BoundedGrid(12.0, 160))

# Fluxonium wall margin, in quanta of the inductive oscillator sqrt(8 E_C E_L).
FLUXONIUM_WALL_QUANTA = 12.0


# ---------------------------------------------------------------------------
# Potentials


def fluxonium_potential(params: FluxoniumParams, x: np.ndarray) -> np.ndarray:
    return 0.5 * params.e_l * x**2 + params.e_j * (1.0 - np.cos(x - params.phi_ext))


def transmon_potential(params: TransmonParams, x: np.ndarray) -> np.ndarray:
    return params.e_j * (1.0 - np.cos(x - params.phi_ext))


def zeropi_potential(params: ZeroPiParams, theta, phi, form: str = "product"):
    """0-pi potential in its cosine-product or cosine-sum form."""
    shift = 0.5 * params.phi_ext
    if form == "product":
        josephson = -2.0 * params.e_j * np.cos(theta) * np.cos(phi - shift)
    elif form == "sum":
        josephson = -params.e_j * (np.cos(theta + phi - shift) + np.cos(theta - phi + shift))
    else:
        raise ValueError(f"unknown form {form!r}")
    return josephson + params.e_l * np.asarray(phi) ** 2


def check_fluxonium_domain(params: FluxoniumParams, grid: BoundedGrid) -> None:
    """Raise DomainTooSmall unless the inductive walls confine the low levels.

    Requires E_L x_max^2 / 2 >= E0 + 12 * omega, where omega = sqrt(8 E_C E_L)
    is the inductive oscillator quantum and E0 = omega / 2.
    """
    omega = math.sqrt(8.0 * params.e_c * params.e_l)
    wall = 0.5 * params.e_l * grid.x_max**2
    needed = 0.5 * omega + FLUXONIUM_WALL_QUANTA * omega
    if wall < needed:
        x_needed = math.sqrt(2.0 * needed / params.e_l)
        raise DomainTooSmall(
            f"x_max={grid.x_max:g} leaves a wall of {wall:.4g} GHz, need {needed:.4g} GHz "
            f"(x_max >= {x_needed:.4g})"
        )


# ---------------------------------------------------------------------------
# Hamiltonians


def transmon_charge_hamiltonian(params: TransmonParams, n_max: int | None = None) -> HermitianOperator:
    """Transmon in the charge basis.

    Diagonal 4 E_C (m - n_g)^2 + E_j, coupling -(E_j / 2) exp(-i phi_ext)
    on (m + 1, m) and its conjugate on (m, m + 1).
    """
    p = validate(params)
    basis = ChargeBasis(default_n_max(p) if n_max is None else n_max)
    m = basis.charges
    mat = np.diag(4.0 * p.e_c * (m - p.n_g) ** 2 + p.e_j).astype(complex)
    hop = -0.5 * p.e_j * np.exp(-1j * p.phi_ext)
    idx = np.arange(basis.dim - 1)
    mat[idx + 1, idx] = hop
    mat[idx, idx + 1] = np.conj(hop)
    return _finalize(basis, mat)


def transmon_twisted_grid_hamiltonian(
    params: TransmonParams, n_points: int = DEFAULT_PERIODIC_POINTS, kinetic: str = "spectral"
) -> HermitianOperator:
    """Transmon on a periodic phase grid with the offset charge gauged into the boundary.

    Substituting psi = exp(i n_g phi) u removes n_g from the kinetic term and
    leaves u(phi + 2 pi) = exp(-2 pi i n_g) u(phi).  ``kinetic`` selects the
    spectral second derivative (default) or the three-point stencil.
    """
    p = validate(params)
    if n_points < 16:
        raise DimensionTooSmall(f"twisted grid needs n_points >= 16, got {n_points}")
    grid = PeriodicGrid(n_points, twist=p.n_g)
    if kinetic == "spectral":
        lap = spectral_second_derivative(grid)
    elif kinetic == "fd":
        lap = periodic_second_difference(grid)
    else:
        raise ValueError(f"unknown kinetic discretization {kinetic!r}")
    potential = transmon_potential(p, grid.points)
    mat = 4.0 * p.e_c * lap + np.diag(potential)
    return _finalize(grid, mat, potential)


def fluxonium_hamiltonian(params: FluxoniumParams, basis: BoundedGrid = DEFAULT_GRID) -> HermitianOperator:
    p = validate(params)
    check_fluxonium_domain(p, basis)
    potential = fluxonium_potential(p, basis.points)
    mat = 4.0 * p.e_c * second_difference(basis) + sp.diags(potential)
    return _finalize(basis, mat, potential)


def zeropi_hamiltonian(params: ZeroPiParams, basis: ProductBasis = DEFAULT_ZEROPI_BASIS) -> HermitianOperator:
    """Reduced 0-pi Hamiltonian E_Cphi n_phi^2 + E_Ctheta n_theta^2 + V(theta, phi)."""
    p = validate(params)
    if not isinstance(basis, ProductBasis):
        raise TypeError("zeropi_hamiltonian needs a ProductBasis")
    if basis.theta.twist != 0.0:
        raise ValueError("the theta grid of the 0-pi circuit is untwisted")
    if basis.theta.n_points < 8 or basis.theta.n_points % 2:
        raise DimensionTooSmall("theta grid needs an even n_points >= 8")
    if basis.phi.x_max < 1.5 * math.pi:
        raise DomainTooSmall(
            f"phi grid must contain the phi = +-pi valleys, need x_max >= 3 pi / 2, got {basis.phi.x_max:g}"
        )
    n_theta, n_phi = basis.shape
    k_theta = sp.csr_matrix(spectral_second_derivative(basis.theta))
    k_phi = second_difference(basis.phi)
    kinetic = p.e_c_theta * sp.kron(k_theta, sp.identity(n_phi)) + p.e_c_phi * sp.kron(
        sp.identity(n_theta), k_phi
    )
    theta, phi = basis.mesh()
    potential = zeropi_potential(p, theta, phi)
    return _finalize(basis, kinetic + sp.diags(potential), potential)


# ---------------------------------------------------------------------------
# Observables

_ALIASES = {
    "flux": "flux", "phi": "flux",
    "charge": "charge", "n": "charge",
    "angle": "angle", "theta": "angle",
}


def observable_operator(basis: BasisSpec, which: str) -> HermitianOperator:
    """Flux, charge or angle operator in ``basis``.

    On grids the coordinate observables are diagonal and the charge is
    -i d/dx by central differences.  In a product basis "flux" and "charge"
    refer to phi and "angle" to theta.  The flux operator does not exist in
    the charge basis.
    """
    kind = _ALIASES.get(which)
    if kind is None:
        raise UnsupportedObservable(f"unknown observable {which!r}")
    if isinstance(basis, ChargeBasis):
        if kind != "charge":
            raise UnsupportedObservable(f"{which} is not single valued in the charge basis")
        return _finalize(basis, np.diag(basis.charges))
    if isinstance(basis, BoundedGrid):
        if kind == "angle":
            raise UnsupportedObservable("a bounded grid carries no angle coordinate")
        if kind == "flux":
            return _finalize(basis, sp.diags(basis.points))
        return _finalize(basis, first_difference(basis))
    if isinstance(basis, PeriodicGrid):
        if kind == "charge":
            return _finalize(basis, first_difference(basis))
        return _finalize(basis, np.diag(basis.points))
    if isinstance(basis, ProductBasis):
        theta, phi = basis.mesh()
        if kind == "flux":
            return _finalize(basis, sp.diags(phi))
        if kind == "angle":
            return _finalize(basis, sp.diags(theta))
        n_phi = sp.kron(sp.identity(basis.theta.dim), first_difference(basis.phi))
        return _finalize(basis, n_phi)
    raise UnsupportedObservable(f"unsupported basis {type(basis).__name__}")
