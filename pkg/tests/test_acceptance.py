"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line (also repeated in the pytest
terminal summary) and asserts both the numerical tolerance and the
wall-clock limit.  Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import contextlib
import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from qubitmech import mechanics
from qubitmech.cli import main
from qubitmech.core import FluxoniumParams, TransmonParams, ZeroPiParams, physical_fields
from qubitmech.eigensolve import lowest_eigenpairs
from qubitmech.observables import charge_dispersion, parity_classify, theta_well_occupation, transition
from qubitmech.operators import (
    DEFAULT_GRID,
    BoundedGrid,
    fluxonium_hamiltonian,
    transmon_charge_hamiltonian,
    transmon_twisted_grid_hamiltonian,
    zeropi_hamiltonian,
    zeropi_potential,
)
from qubitmech.pipeline import SweepSpec, run_sweep
from qubitmech.presets import (
    FLUXONIUM_DEFAULT,
    ZEROPI_COARSE_BASIS,
    ZEROPI_PROTECTED,
    ZEROPI_PROTECTED_BASIS,
)

from conftest import ACCEPTANCE_LINES, rel_err

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


class Criterion:
    def __init__(self, number, title, limit_s):
        self.number, self.title, self.limit = number, title, limit_s
        self.failed = []
        self.notes = []

    def check(self, label, ok, detail):
        self.notes.append(f"{label} {detail}")
        if not ok:
            self.failed.append(label)


@contextlib.contextmanager
def criterion(number, title, limit_s):
    c = Criterion(number, title, limit_s)
    start = time.perf_counter()
    error = None
    try:
        yield c
    except Exception as exc:
        error = exc
        c.failed.append(f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - start
    if elapsed > limit_s:
        c.failed.append("runtime")
    status = "FAIL" if c.failed else "PASS"
    line = f"{status} [{number}] {title}: {'; '.join(c.notes)}; {elapsed:.1f}s (limit {limit_s:g}s)"
    if c.failed:
        line += f"; failed: {', '.join(c.failed)}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    if error is not None:
        raise error
    assert not c.failed, line


def test_criterion_1_rotor_limit():
    with criterion(1, "rotor limit", 1.0) as c:
        e_c = 1.0
        spec = lowest_eigenpairs(transmon_charge_hamiltonian(TransmonParams(e_c, 0.0, 0.0)), 5)
        exact = np.array([0, 4, 4, 16, 16]) * e_c
        err = float(np.max(np.abs(spec.energies - exact)) / (16 * e_c))
        c.check("levels", err <= 1e-8, f"max rel error {err:.1e}")


def test_criterion_2_harmonic_limit():
    with criterion(2, "harmonic limit", 5.0) as c:
        p = FluxoniumParams(1.0, 1.0, 0.0, 0.0)
        exact = math.sqrt(8 * p.e_c * p.e_l) * (np.arange(4) + 0.5)
        coarse = rel_err(lowest_eigenpairs(fluxonium_hamiltonian(p), 4).energies, exact)
        fine_grid = BoundedGrid(DEFAULT_GRID.x_max, 2 * DEFAULT_GRID.n_points + 1)  # spacing exactly halved
        fine = rel_err(lowest_eigenpairs(fluxonium_hamiltonian(p, fine_grid), 4).energies, exact)
        c.check("default grid", coarse <= 1e-4, f"rel error {coarse:.2e}")
        c.check("doubling", fine <= 0.5 * coarse, f"error ratio {coarse / fine:.2f}")


def test_criterion_3_cross_basis():
    with criterion(3, "charge vs twisted grid", 30.0) as c:
        worst = 0.0
        for ratio in (1.0, 10.0, 50.0):
            for n_g in (0.0, 0.25, 0.5):
                p = TransmonParams(1.0, ratio, n_g)
                charge = lowest_eigenpairs(transmon_charge_hamiltonian(p), 4).energies
                grid = lowest_eigenpairs(transmon_twisted_grid_hamiltonian(p), 4).energies
                worst = max(worst, rel_err(grid, charge))
        c.check("9 cases", worst <= 1e-6, f"max rel difference {worst:.1e}")


def test_criterion_4_dispersion_suppression():
    with criterion(4, "charge dispersion suppression", 30.0) as c:
        values = [charge_dispersion(TransmonParams(1.0, e_j), 0) for e_j in (5.0, 10.0, 20.0, 50.0)]
        c.check("monotone", all(a > b for a, b in zip(values, values[1:])), "[" + ", ".join(f"{v:.2e}" for v in values) + "]")
        c.check("E_j=50", values[-1] < 1e-4, f"{values[-1]:.1e} GHz")


def test_criterion_5_fluxonium_sweep():
    with criterion(5, "fluxonium flux sweep", 180.0) as c:
        spec = SweepSpec("fluxonium", FLUXONIUM_DEFAULT, "phi_ext", 0.5 * math.pi, 1.5 * math.pi, 101, 4, {"x_max": 12.0, "n_points": 800})
        result = run_sweep(spec)
        c.check("no failures", result.failures == 0, f"{result.failures} failed")
        values = spec.values()
        f10 = np.array([r.f10 for r in result.records])
        flux = np.array([r.flux_mat_el for r in result.records])
        mid, quarter = 50, 25
        assert values[mid] == pytest.approx(math.pi) and values[quarter] == pytest.approx(0.75 * math.pi)
        asym = float(np.max(np.abs(f10 - f10[::-1])) / np.max(f10))
        c.check("(a) f10 min", int(np.argmin(f10)) == mid, f"at index {int(np.argmin(f10))}")
        c.check("(a) symmetry", asym <= 1e-6, f"{asym:.1e}")
        ratio = flux[quarter] / flux.max()
        c.check("(b) |<0|phi|1>| max", int(np.argmax(flux)) == mid, f"at index {int(np.argmax(flux))}")
        c.check("(b) 3pi/4", ratio <= 0.1, f"{ratio:.3f} of max")
        d = result.records[quarter].disjointness
        c.check("(c) disjointness", d >= 0.9, f"{d:.3f}")
        at_pi = lowest_eigenpairs(fluxonium_hamiltonian(FluxoniumParams(1.0, 0.5, 8.0, math.pi)), 4)
        parities = sorted(parity_classify(at_pi, i) for i in (0, 1))
        c.check("(c) parity", parities == ["even", "odd"], "/".join(parities))


def test_criterion_6_classical_statics():
    with criterion(6, "classical statics", 120.0) as c:
        e_l, e_j = 0.5, 50.0
        offsets = np.linspace(0.5, 1.0, 6)
        slopes = []
        for sign in (1, -1):
            f10 = []
            for d in offsets:
                p = FluxoniumParams(1.0, e_l, e_j, math.pi + sign * d)
                f10.append(transition(lowest_eigenpairs(fluxonium_hamiltonian(p), 2), 0, 1))
            slopes.append(np.polyfit(offsets, f10, 1)[0])
        target = 2 * math.pi * e_l
        worst = max(abs(s / target - 1) for s in slopes)
        c.check("quantum slope", worst <= 0.1, f"{np.mean(slopes):.3f} vs {target:.3f}")
        dev = 0.0
        for d in (-1.0, -0.5, 0.5, 0.75, 1.0):
            p = FluxoniumParams(1.0, e_l, e_j, math.pi + d)
            dev = max(dev, abs(mechanics.classical_splitting(p) / mechanics.classical_splitting_first_order(p) - 1))
        c.check("classical splitting", dev <= 0.05, f"max rel deviation {dev:.3f}")


def test_criterion_7_mapping_round_trips():
    with criterion(7, "mapping round trips", 1.0) as c:
        rng = np.random.default_rng(7)
        worst = 0.0

        def compare(a, b):
            va = np.array(list(physical_fields(a).values()))
            vb = np.array(list(physical_fields(b).values()))
            scale = np.where(va == 0, 1.0, np.abs(va))
            return float(np.max(np.abs(vb - va) / scale))

        for _ in range(100):
            e = rng.uniform(0.01, 100, 4)
            phi, n_g, length = rng.uniform(0, 2 * math.pi), rng.uniform(0, 1), rng.uniform(0.1, 10)
            t = TransmonParams(e[0], e[1], n_g, phi)
            f = FluxoniumParams(e[0], e[2], e[1], phi)
            z = ZeroPiParams(e[0], e[3], e[1], e[2], phi)
            worst = max(
                worst,
                compare(t, mechanics.transmon_m2e(mechanics.transmon_e2m(t, length))),
                compare(f, mechanics.fluxonium_m2e(mechanics.fluxonium_e2m(f, length))),
                compare(z, mechanics.zeropi_m2e(mechanics.zeropi_e2m(z, length))),
            )
        c.check("300 round trips", worst <= 1e-12, f"max rel error {worst:.1e}")


@pytest.mark.slow
def test_criterion_8_zeropi_protection():
    with criterion(8, "0-pi identity and protected regime", 600.0) as c:
        p = ZeroPiParams(1.0, 1.0, 5.0, 0.05, 0.4)
        dev = mechanics.zeropi_potential_identity_check(p, 1000)
        c.check("identity", dev <= 1e-12 * p.e_j, f"{dev:.1e}")

        def summary(spectrum):
            e = spectrum.energies
            occ = [theta_well_occupation(spectrum, i) for i in (0, 1)]
            return (e[1] - e[0]) / (e[2] - e[1]), occ

        oracle = lowest_eigenpairs(zeropi_hamiltonian(ZEROPI_PROTECTED, ZEROPI_COARSE_BASIS), 4, method="dense")
        fine = lowest_eigenpairs(zeropi_hamiltonian(ZEROPI_PROTECTED, ZEROPI_PROTECTED_BASIS), 4)
        for label, spectrum in (("oracle", oracle), ("solver", fine)):
            ratio, (occ0, occ1) = summary(spectrum)
            opposite = (occ0[0] >= 0.95 and occ1[1] >= 0.95) or (occ0[1] >= 0.95 and occ1[0] >= 0.95)
            c.check(f"{label} split/gap", ratio <= 0.01, f"{ratio:.4f}")
            c.check(f"{label} wells", opposite, f"({occ0[0]:.3f},{occ0[1]:.3f})/({occ1[0]:.3f},{occ1[1]:.3f})")
        agree = rel_err(fine.energies, oracle.energies)
        c.check("solver vs oracle", agree <= 0.03, f"levels within {agree:.3f}")


def test_criterion_9_determinism(tmp_path, monkeypatch):
    with criterion(9, "sweep determinism", 300.0) as c:
        outputs = []
        runs = [("1", None), ("4", None), (None, "0"), (None, "2")]
        for i, (threads, env) in enumerate(runs):
            if env is None:
                monkeypatch.delenv("QUBITMECH_THREADS", raising=False)
            else:
                monkeypatch.setenv("QUBITMECH_THREADS", env)
            out = tmp_path / f"run{i}.csv"
            argv = ["sweep", "--config", str(CONFIGS / "fluxonium_flux_sweep.json"), "--out", str(out), "--set", "sweep.steps=21"]
            if threads:
                argv += ["--threads", threads]
            assert main(argv) == 0
            meta = json.loads(out.with_name(out.stem + ".meta.json").read_text())
            meta.pop("timestamp")
            outputs.append((out.read_bytes(), json.dumps(meta, sort_keys=True)))
        c.check("csv", len({o[0] for o in outputs}) == 1, f"{len(runs)} runs")
        c.check("metadata", len({o[1] for o in outputs}) == 1, "timestamp excluded")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
