"""Built-in invariant suite run by ``qubitmech check``."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np

from . import mechanics, operators
from .core import FluxoniumParams, TransmonParams, ZeroPiParams, physical_fields
from .eigensolve import lowest_eigenpairs
from .operators import (
    BoundedGrid,
    ChargeBasis,
    PeriodicGrid,
    ProductBasis,
    fluxonium_hamiltonian,
    observable_operator,
    transmon_charge_hamiltonian,
    transmon_twisted_grid_hamiltonian,
    zeropi_hamiltonian,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def _rel(a, b) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def check_rotor_limit() -> CheckResult:
    spec = lowest_eigenpairs(transmon_charge_hamiltonian(TransmonParams(1.0, 0.0), 2), 5)
    err = float(np.max(np.abs(spec.energies - [0, 4, 4, 16, 16]) / 16.0))
    return CheckResult("rotor_limit", err <= 1e-8, f"max rel error {err:.1e} (limit 1e-8)")


def check_harmonic_limit() -> CheckResult:
    spec = lowest_eigenpairs(fluxonium_hamiltonian(FluxoniumParams(1.0, 1.0, 0.0)), 4)
    exact = math.sqrt(8.0) * (np.arange(4) + 0.5)
    err = _rel(spec.energies, exact)
    return CheckResult("harmonic_limit", err <= 1e-4, f"max rel error {err:.1e} (limit 1e-4)")


def check_cross_basis() -> CheckResult:
    p = TransmonParams(1.0, 10.0, 0.25)
    charge = lowest_eigenpairs(transmon_charge_hamiltonian(p, 30), 4).energies
    grid = lowest_eigenpairs(transmon_twisted_grid_hamiltonian(p, 512), 4).energies
    err = _rel(grid, charge)
    return CheckResult("cross_basis", err <= 1e-6, f"charge vs twisted grid rel error {err:.1e} (limit 1e-6)")


def check_offset_charge_symmetry() -> CheckResult:
    base = lowest_eigenpairs(transmon_charge_hamiltonian(TransmonParams(1.0, 5.0, 0.3), 30), 4).energies
    worst = 0.0
    for n_g in (1.3, -0.3):
        other = lowest_eigenpairs(transmon_charge_hamiltonian(TransmonParams(1.0, 5.0, n_g), 30), 4).energies
        worst = max(worst, _rel(other, base))
    return CheckResult("offset_charge_symmetry", worst <= 1e-10, f"n_g -> n_g+1, -n_g rel error {worst:.1e}")


def check_hermiticity() -> CheckResult:
    ops = [
        transmon_charge_hamiltonian(TransmonParams(1.0, 20.0, 0.3, 0.7), 10),
        transmon_twisted_grid_hamiltonian(TransmonParams(1.0, 20.0, 0.3, 0.7), 64),
        fluxonium_hamiltonian(FluxoniumParams(1.0, 0.5, 8.0, 2.0)),
        zeropi_hamiltonian(ZeroPiParams(10.0, 0.2, 5.0, 0.04, 0.3), ProductBasis(PeriodicGrid(16), BoundedGrid(6.0, 20))),
        observable_operator(PeriodicGrid(32, 0.3), "charge"),
        observable_operator(BoundedGrid(5.0, 40), "charge"),
        observable_operator(ChargeBasis(3), "charge"),
    ]
    worst = max(op.hermiticity_defect() for op in ops)
    return CheckResult("hermiticity", worst <= 1e-12, f"max |H - H^dag| / max|H| = {worst:.1e} over {len(ops)} operators")


def check_zeropi_identity() -> CheckResult:
    p = ZeroPiParams(1.0, 1.0, 5.0, 0.05, 0.4)
    dev = mechanics.zeropi_potential_identity_check(p, 1000)
    return CheckResult("zeropi_identity", dev <= 1e-12 * p.e_j, f"max deviation {dev:.1e} (limit {1e-12 * p.e_j:.0e})")


def check_mapping_round_trip() -> CheckResult:
    t = TransmonParams(0.3, 17.0, 0.2, 1.0)
    f = FluxoniumParams(1.1, 0.45, 7.5, 2.5)
    z = ZeroPiParams(12.0, 0.3, 6.0, 0.05, 0.2)
    pairs = [
        (t, mechanics.transmon_m2e(mechanics.transmon_e2m(t, 1.3))),
        (f, mechanics.fluxonium_m2e(mechanics.fluxonium_e2m(f, 0.7))),
        (z, mechanics.zeropi_m2e(mechanics.zeropi_e2m(z, 2.1))),
    ]
    worst = 0.0
    for a, b in pairs:
        va = np.array(list(physical_fields(a).values()), float)
        vb = np.array(list(physical_fields(b).values()), float)
        worst = max(worst, _rel(vb, va))
    return CheckResult("mapping_round_trip", worst <= 1e-12, f"max rel error {worst:.1e} (limit 1e-12)")


def check_dense_vs_lanczos() -> CheckResult:
    op = fluxonium_hamiltonian(FluxoniumParams(1.0, 0.5, 8.0, 2.0), BoundedGrid(12.0, 400))
    dense = lowest_eigenpairs(op, 4, method="dense").energies
    krylov = lowest_eigenpairs(op, 4, method="lanczos").energies
    err = _rel(krylov, dense)
    return CheckResult("dense_vs_lanczos", err <= 1e-8, f"rel difference {err:.1e} (limit 1e-8)")


CHECKS = [
    check_rotor_limit,
    check_harmonic_limit,
    check_cross_basis,
    check_offset_charge_symmetry,
    check_hermiticity,
    check_zeropi_identity,
    check_mapping_round_trip,
    check_dense_vs_lanczos,
]


@contextlib.contextmanager
def stencil_fault(amount: float = 0.01):
    """Temporarily perturb the finite-difference stencils (negative control)."""
    previous = operators._STENCIL_FAULT
    operators._STENCIL_FAULT = amount
    try:
        yield
    finally:
        operators._STENCIL_FAULT = previous


def run_checks(fault: bool = False) -> list[CheckResult]:
    ctx = stencil_fault() if fault else contextlib.nullcontext()
    results = []
    with ctx:
        for check in CHECKS:
            try:
                results.append(check())
            except Exception as exc:  # a crashing check is a failed check
                results.append(CheckResult(check.__name__.removeprefix("check_"), False, f"{type(exc).__name__}: {exc}"))
    return results
