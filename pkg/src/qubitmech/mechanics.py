"""Mechanical analogs of the qubit circuits.

All mappings use hbar = 1, so an inertia I corresponds to a charging energy
1 / (2 I) in GHz and carries units of 1/GHz.  To convert to SI multiply the
inertia by hbar^2 / (h * 1e9) in J s^2 and the energies by h * 1e9 in J.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import TWO_PI, FluxoniumParams, TransmonParams, ZeroPiParams, validate
from .errors import NonPositiveInput, RootFindingFailure, SingleWell
from .operators import zeropi_potential

HBAR = 1.0
BRACKET_POINTS = 2000
ROOT_XTOL = 1e-12
DEDUP_TOL = 1e-8
DEFAULT_WINDOW = 8.0 * math.pi


@dataclass(frozen=True)
class TransmonMech:
    """Balanced pendulum (I = 2 m L^2) driven by a slider spring of rate k."""

    inertia_I: float
    k: float
    length_L: float
    n_g: float = 0.0
    theta_offset: float = 0.0


@dataclass(frozen=True)
class FluxoniumMech:
    """Pendulum of length 2 l with slider spring k_j and torsion spring k_l."""

    inertia_I: float
    k_j: float
    k_l: float
    half_length_l: float
    theta_offset: float = 0.0


@dataclass(frozen=True)
class ZeroPiMech:
    """Two pendula joined by differential gearboxes with output arm length L."""

    inertia_I_phi: float
    inertia_I_theta: float
    k_j: float
    k_l: float
    length_L: float
    theta_offset: float = 0.0


@dataclass(frozen=True)
class Equilibrium:
    theta_star: float
    potential: float
    stable: bool


@dataclass(frozen=True)
class Pendulum:
    m: float
    g: float
    L: float


@dataclass(frozen=True)
class SliderSpring:
    k: float
    L: float


def _positive(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise NonPositiveInput(f"{name} must be positive and finite, got {value!r}")


def _nonnegative(**values):
    for name, value in values.items():
        if not (math.isfinite(value) and value >= 0):
            raise NonPositiveInput(f"{name} must be non-negative and finite, got {value!r}")


def transmon_e2m(params: TransmonParams, length_L: float) -> TransmonMech:
    p = validate(params)
    _positive(length_L=length_L)
    return TransmonMech(
        inertia_I=HBAR**2 / (2.0 * p.e_c),
        k=4.0 * p.e_j / length_L**2,
        length_L=length_L,
        n_g=p.n_g,
        theta_offset=p.phi_ext,
    )


def transmon_m2e(mech: TransmonMech) -> TransmonParams:
    _positive(inertia_I=mech.inertia_I, length_L=mech.length_L)
    _nonnegative(k=mech.k)
    return validate(
        TransmonParams(
            e_c=HBAR**2 / (2.0 * mech.inertia_I),
            e_j=0.25 * mech.k * mech.length_L**2,
            n_g=mech.n_g,
            phi_ext=mech.theta_offset,
        )
    )


def fluxonium_e2m(params: FluxoniumParams, half_length_l: float) -> FluxoniumMech:
    p = validate(params)
    _positive(half_length_l=half_length_l)
    return FluxoniumMech(
        inertia_I=HBAR**2 / (2.0 * p.e_c),
        k_j=4.0 * p.e_j / half_length_l**2,
        k_l=8.0 * p.e_l,
        half_length_l=half_length_l,
        theta_offset=p.phi_ext,
    )


def fluxonium_m2e(mech: FluxoniumMech) -> FluxoniumParams:
    _positive(inertia_I=mech.inertia_I, k_l=mech.k_l, half_length_l=mech.half_length_l)
    _nonnegative(k_j=mech.k_j)
    return validate(
        FluxoniumParams(
            e_c=HBAR**2 / (2.0 * mech.inertia_I),
            e_l=mech.k_l / 8.0,
            e_j=0.25 * mech.k_j * mech.half_length_l**2,
            phi_ext=mech.theta_offset,
        )
    )


def zeropi_e2m(params: ZeroPiParams, length_L: float) -> ZeroPiMech:
    p = validate(params)
    _positive(length_L=length_L)
    return ZeroPiMech(
        inertia_I_phi=HBAR**2 / (8.0 * p.e_c_phi),
        inertia_I_theta=HBAR**2 / (8.0 * p.e_c_theta),
        k_j=2.0 * p.e_j / length_L**2,
        k_l=0.5 * p.e_l,
        length_L=length_L,
        theta_offset=p.phi_ext,
    )


def zeropi_m2e(mech: ZeroPiMech) -> ZeroPiParams:
    _positive(
        inertia_I_phi=mech.inertia_I_phi,
        inertia_I_theta=mech.inertia_I_theta,
        k_l=mech.k_l,
        length_L=mech.length_L,
    )
    _nonnegative(k_j=mech.k_j)
    return validate(
        ZeroPiParams(
            e_c_phi=HBAR**2 / (8.0 * mech.inertia_I_phi),
            e_c_theta=HBAR**2 / (8.0 * mech.inertia_I_theta),
            e_j=0.5 * mech.k_j * mech.length_L**2,
            e_l=2.0 * mech.k_l,
            phi_ext=mech.theta_offset,
        )
    )


def mechanical_potential(system: Pendulum | SliderSpring, theta):
    """Potential energy of a pendulum or a slider-spring crank at angle ``theta``.

    The slider spring is stretched by L sin(theta / 2), giving
    k L^2 (1 - cos theta) / 4.
    """
    theta = np.asarray(theta, dtype=float)
    if isinstance(system, Pendulum):
        _positive(m=system.m, g=system.g, L=system.L)
        return system.m * system.g * system.L * (1.0 - np.cos(theta))
    if isinstance(system, SliderSpring):
        _positive(k=system.k, L=system.L)
        return 0.5 * system.k * (system.L * np.sin(0.5 * theta)) ** 2
    raise TypeError(f"unknown mechanism {type(system).__name__}")


def fluxonium_classical_potential(params: FluxoniumParams, theta):
    return 0.5 * params.e_l * np.asarray(theta) ** 2 + params.e_j * (1.0 - np.cos(np.asarray(theta) - params.phi_ext))


def _force(p: FluxoniumParams, theta):
    return p.e_l * theta + p.e_j * np.sin(theta - p.phi_ext)


def _stiffness(p: FluxoniumParams, theta):
    return p.e_l + p.e_j * np.cos(theta - p.phi_ext)


def classical_equilibria(params: FluxoniumParams, search_window: float = DEFAULT_WINDOW) -> list[Equilibrium]:
    """Static equilibria of the fluxonium mechanism in [-w/2, w/2].

    Roots of U'(theta) = E_L theta + E_j sin(theta - phi_ext) are bracketed by
    sign changes on a 2000-point grid and refined to 1e-12; U'' > 0 marks a
    stable point.  Results are sorted by angle.
    """
    p = validate(params)
    if not search_window >= 2.0 * TWO_PI:
        raise ValueError(f"search window must be at least 4 pi, got {search_window}")
    half = 0.5 * search_window
    grid = np.linspace(-half, half, BRACKET_POINTS)
    force = _force(p, grid)
    roots = [float(x) for x, f in zip(grid, force) if f == 0.0]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], force[:-1], force[1:]):
        if fa * fb < 0.0:
            try:
                roots.append(brentq(lambda t: _force(p, t), a, b, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
            except (RuntimeError, ValueError) as exc:
                raise RootFindingFailure(f"refinement failed in [{a}, {b}]: {exc}") from exc
    if not roots:
        raise RootFindingFailure("no equilibrium inside the search window")
    roots.sort()
    unique = [roots[0]]
    for r in roots[1:]:
        if r - unique[-1] > DEDUP_TOL:
            unique.append(r)
    return [
        Equilibrium(r, float(fluxonium_classical_potential(p, r)), bool(_stiffness(p, r) > 0.0))
        for r in unique
    ]


def classical_splitting(params: FluxoniumParams, search_window: float = DEFAULT_WINDOW) -> float:
    """Potential difference between the two lowest stable equilibria.

    Raises SingleWell when the mechanism has only one stable configuration.
    """
    stable = sorted(
        (eq for eq in classical_equilibria(params, search_window) if eq.stable),
        key=lambda eq: eq.potential,
    )
    if len(stable) < 2:
        raise SingleWell("only one stable equilibrium; E_j / E_L is too small for two wells")
    return abs(stable[1].potential - stable[0].potential)


def classical_splitting_first_order(params: FluxoniumParams) -> float:
    """Leading-order splitting 2 pi E_L |phi_ext - pi| (wells at phi_ext and phi_ext - 2 pi)."""
    p = validate(params)
    return TWO_PI * p.e_l * abs(p.phi_ext - math.pi)


def differential_output(omega1: float, omega2: float) -> float:
    """Output shaft speed of a spur-gear differential."""
    if not (math.isfinite(omega1) and math.isfinite(omega2)):
        raise ValueError("angular velocities must be finite")
    return 0.5 * (omega1 + omega2)


def zeropi_potential_identity_check(params: ZeroPiParams, samples: int = 1000, seed: int = 0) -> float:
    """Largest gap between the product and sum forms of the 0-pi potential.

    Samples are uniform in theta in [0, 2 pi) and phi in [-4 pi, 4 pi].
    """
    p = validate(params)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, TWO_PI, samples)
    phi = rng.uniform(-2.0 * TWO_PI, 2.0 * TWO_PI, samples)
    product = zeropi_potential(p, theta, phi, "product")
    total = zeropi_potential(p, theta, phi, "sum")
    return float(np.max(np.abs(product - total)))
