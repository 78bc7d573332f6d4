"""Qubit observables derived from spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import TransmonParams, validate
from .eigensolve import Spectrum, lowest_eigenpairs
from .errors import BadLevel, BasisMismatch, UnsupportedBasis, UnsupportedObservable
from .operators import (
    GRID_BASES,
    BoundedGrid,
    ChargeBasis,
    HermitianOperator,
    PeriodicGrid,
    ProductBasis,
    observable_operator,
    transmon_charge_hamiltonian,
)

PARITY_TOL = 1e-6
DISJOINTNESS_METRIC = "overlap-based disjointness"


@dataclass(frozen=True)
class QubitReport:
    """Summary of the two lowest levels.

    ``flux_mat_el`` and ``disjointness`` are NaN in the charge basis, where
    neither quantity is defined.  ``disjointness`` is the overlap-based
    measure of :func:`disjointness`.
    """

    f10: float
    f21: float
    anharmonicity: float
    flux_mat_el: float
    charge_mat_el: float
    disjointness: float


def _check_level(spectrum: Spectrum, *levels: int) -> None:
    for lvl in levels:
        if int(lvl) != lvl or not 0 <= lvl < spectrum.count:
            raise BadLevel(f"level {lvl} outside 0..{spectrum.count - 1}")


def transition(spectrum: Spectrum, i: int, j: int) -> float:
    """E_j - E_i in GHz for i < j."""
    _check_level(spectrum, i, j)
    if not i < j:
        raise BadLevel(f"transition needs i < j, got ({i}, {j})")
    return float(spectrum.energies[j] - spectrum.energies[i])


def charge_dispersion(params: TransmonParams, level: int = 0, n_max: int | None = None) -> float:
    """|E_level(n_g = 1/2) - E_level(n_g = 0)| from charge-basis solves."""
    p = validate(params)
    results = []
    for n_g in (0.0, 0.5):
        op = transmon_charge_hamiltonian(TransmonParams(p.e_c, p.e_j, n_g, p.phi_ext), n_max)
        if not 0 <= level < op.dim - 1:
            raise BadLevel(f"level {level} needs n_max > {level // 2}")
        results.append(lowest_eigenpairs(op, level + 1).energies[level])
    return abs(results[1] - results[0])


def matrix_element(spectrum: Spectrum, op: HermitianOperator, i: int, j: int) -> float:
    """|<i|A|j>| with the basis quadrature weight applied."""
    if op.basis != spectrum.basis:
        raise BasisMismatch("operator and spectrum live in different bases")
    _check_level(spectrum, i, j)
    w = spectrum.basis.weight
    value = np.vdot(spectrum.states[:, i], op.matrix @ spectrum.states[:, j]) * w
    return float(abs(value))


def disjointness(spectrum: Spectrum, i: int, j: int) -> float:
    """1 - sum |psi_i| |psi_j| w over the grid.

    One for states with non-overlapping supports, zero for identical ones.
    """
    if not isinstance(spectrum.basis, GRID_BASES):
        raise UnsupportedBasis("disjointness needs a grid basis")
    _check_level(spectrum, i, j)
    if i == j:
        return 0.0
    overlap = np.sum(np.abs(spectrum.states[:, i]) * np.abs(spectrum.states[:, j])) * spectrum.basis.weight
    return float(min(1.0, max(0.0, 1.0 - overlap)))


def _reflect(basis, psi: np.ndarray) -> np.ndarray:
    if isinstance(basis, (BoundedGrid, ChargeBasis)):
        return psi[::-1]
    if isinstance(basis, PeriodicGrid):
        return np.roll(psi[::-1], 1)
    if isinstance(basis, ProductBasis):
        grid = psi.reshape(basis.shape)
        return np.roll(grid[::-1, ::-1], 1, axis=0).ravel()
    raise UnsupportedBasis(type(basis).__name__)


def parity_classify(spectrum: Spectrum, level: int, tol: float = PARITY_TOL) -> str:
    """"even", "odd" or "none" under x -> -x about the grid centre.

    Meaningful only when the potential itself is even.
    """
    _check_level(spectrum, level)
    psi = spectrum.states[:, level]
    mirrored = _reflect(spectrum.basis, psi)
    norm = math.sqrt(spectrum.basis.weight)
    if np.linalg.norm(psi - mirrored) * norm <= tol:
        return "even"
    if np.linalg.norm(psi + mirrored) * norm <= tol:
        return "odd"
    return "none"


def theta_well_occupation(spectrum: Spectrum, level: int) -> tuple[float, float]:
    """Probability of theta in (-pi/2, pi/2] and in (pi/2, 3 pi/2]."""
    basis = spectrum.basis
    if not isinstance(basis, ProductBasis):
        raise UnsupportedBasis("theta occupation needs a product basis")
    _check_level(spectrum, level)
    density = (np.abs(spectrum.states[:, level]) ** 2).reshape(basis.shape).sum(axis=1) * basis.weight
    theta = basis.theta.points
    near_pi = (theta > 0.5 * math.pi) & (theta <= 1.5 * math.pi)
    p_pi = float(density[near_pi].sum())
    p_zero = float(density[~near_pi].sum())
    total = p_zero + p_pi
    return p_zero / total, p_pi / total


def qubit_report(spectrum: Spectrum) -> QubitReport:
    """Transition frequencies, matrix elements and disjointness of levels 0 and 1."""
    f10 = transition(spectrum, 0, 1)
    f21 = transition(spectrum, 1, 2) if spectrum.count > 2 else math.nan
    basis = spectrum.basis
    try:
        flux = matrix_element(spectrum, observable_operator(basis, "flux"), 0, 1)
    except UnsupportedObservable:
        flux = math.nan
    charge = matrix_element(spectrum, observable_operator(basis, "charge"), 0, 1)
    disj = disjointness(spectrum, 0, 1) if isinstance(basis, GRID_BASES) else math.nan
    return QubitReport(f10, f21, f21 - f10, flux, charge, disj)
