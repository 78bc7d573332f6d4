"""Configuration loading, parameter sweeps and CSV/JSON persistence.

Config schema
-------------
A JSON object with these keys (anything else is rejected)::

    {
      "circuit": "transmon" | "fluxonium" | "zeropi",
      "params":  {energies in GHz, phi_ext in radians, n_g for transmon},
      "levels":  4,                               # optional, >= 2
      "sweep":   {"variable": "phi_ext" | "n_g" | "ej_over_ec",
                  "from": a, "to": b, "steps": n},  # optional
      "basis":   {...}                            # optional, per circuit
    }

Basis keys: transmon ``kind`` ("charge" or "grid"), ``n_max``, ``n_points``;
fluxonium ``x_max``, ``n_points``; zeropi ``theta_points``, ``x_max``,
``phi_points``.
"""

from __future__ import annotations

import copy
import csv
import dataclasses
import datetime as _dt
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import CIRCUITS, CircuitParams, circuit_name, physical_fields, validate
from .eigensolve import DENSE_TOL, ITERATIVE_TOL, Spectrum, lowest_eigenpairs
from .errors import (
    ConfigurationError,
    IoError,
    ParseError,
    QubitMechError,
    SchemaError,
    UnsupportedBasis,
)
from .observables import DISJOINTNESS_METRIC, QubitReport, qubit_report
from .operators import (
    DEFAULT_GRID,
    DEFAULT_PERIODIC_POINTS,
    DEFAULT_ZEROPI_BASIS,
    BoundedGrid,
    HermitianOperator,
    PeriodicGrid,
    ProductBasis,
    default_n_max,
    fluxonium_hamiltonian,
    transmon_charge_hamiltonian,
    transmon_twisted_grid_hamiltonian,
    zeropi_hamiltonian,
)

log = logging.getLogger(__name__)

THREADS_ENV = "QUBITMECH_THREADS"
CSV_DIGITS = 12
DEFAULT_LEVELS = 4

_TOP_KEYS = {"circuit", "params", "levels", "sweep", "basis"}
_SWEEP_KEYS = {"variable", "from", "to", "steps"}
_REQUIRED = {
    "transmon": ("e_c", "e_j"),
    "fluxonium": ("e_c", "e_l", "e_j"),
    "zeropi": ("e_c_phi", "e_c_theta", "e_j", "e_l"),
}
_SWEEPABLE = {
    "transmon": ("n_g", "phi_ext", "ej_over_ec"),
    "fluxonium": ("phi_ext", "ej_over_ec"),
    "zeropi": ("phi_ext",),
}
_BASIS_KEYS = {
    "transmon": {"kind", "n_max", "n_points"},
    "fluxonium": {"x_max", "n_points"},
    "zeropi": {"theta_points", "x_max", "phi_points"},
}


@dataclass(frozen=True)
class PointJob:
    circuit: str
    params: CircuitParams
    levels: int = DEFAULT_LEVELS
    basis: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SweepSpec:
    circuit: str
    base_params: CircuitParams
    swept: str
    start: float
    stop: float
    steps: int
    levels: int = DEFAULT_LEVELS
    basis: dict = field(default_factory=dict)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass(frozen=True)
class SweepRecord:
    swept_value: float
    energies: tuple = ()
    f10: float = math.nan
    flux_mat_el: float = math.nan
    charge_mat_el: float = math.nan
    disjointness: float = math.nan
    error: str | None = None
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    records: list
    metadata: dict

    @property
    def failures(self) -> int:
        return sum(not r.ok for r in self.records)


# ---------------------------------------------------------------------------
# Config


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _number(value, name: str) -> float:
    if not _is_number(value):
        raise SchemaError(f"{name} must be a number, got {value!r}", name)
    return float(value)


def _integer(value, name: str, minimum: int) -> int:
    if not _is_number(value) or int(value) != value:
        raise SchemaError(f"{name} must be an integer, got {value!r}", name)
    if value < minimum:
        raise SchemaError(f"{name} must be >= {minimum}, got {value}", name)
    return int(value)


def _reject_unknown(mapping: dict, allowed, prefix: str) -> None:
    for key in mapping:
        if key not in allowed:
            name = f"{prefix}{key}"
            raise SchemaError(f"unknown field {name!r}", name)


def apply_overrides(document: dict, overrides) -> dict:
    """Set dotted keys such as ``params.phi_ext=3.14159`` on a parsed config.

    Values are read as JSON literals when possible and as strings otherwise.
    """
    doc = copy.deepcopy(document)
    for item in overrides:
        key, sep, text = item.partition("=")
        if not sep or not key:
            raise SchemaError(f"override {item!r} is not of the form key=value", item)
        try:
            value = json.loads(text)
        except json.JSONDecodeError:
            value = text
        node = doc
        parts = key.split(".")
        for part in parts[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            if not isinstance(child, dict):
                raise SchemaError(f"override {key!r} descends into a non-object", key)
            node = child
        node[parts[-1]] = value
    return doc


def _default_basis(circuit: str, given: dict, params: CircuitParams, max_e_j: float) -> dict:
    _reject_unknown(given, _BASIS_KEYS[circuit], "basis.")
    if circuit == "transmon":
        kind = given.get("kind", "charge")
        if kind not in ("charge", "grid"):
            raise SchemaError(f"basis.kind must be 'charge' or 'grid', got {kind!r}", "basis.kind")
        probe = dataclasses.replace(params, e_j=max_e_j)
        basis = {"kind": kind}
        if kind == "charge":
            basis["n_max"] = _integer(given.get("n_max", default_n_max(probe)), "basis.n_max", 1)
        else:
            basis["n_points"] = _integer(given.get("n_points", DEFAULT_PERIODIC_POINTS), "basis.n_points", 16)
        return basis
    if circuit == "fluxonium":
        return {
            "x_max": _number(given.get("x_max", DEFAULT_GRID.x_max), "basis.x_max"),
            "n_points": _integer(given.get("n_points", DEFAULT_GRID.n_points), "basis.n_points", 3),
        }
    return {
        "theta_points": _integer(
            given.get("theta_points", DEFAULT_ZEROPI_BASIS.theta.n_points), "basis.theta_points", 8
        ),
        "x_max": _number(given.get("x_max", DEFAULT_ZEROPI_BASIS.phi.x_max), "basis.x_max"),
        "phi_points": _integer(
            given.get("phi_points", DEFAULT_ZEROPI_BASIS.phi.n_points), "basis.phi_points", 3
        ),
    }


def parse_document(document) -> PointJob | SweepSpec:
    """Validate a decoded config object and apply defaults."""
    if not isinstance(document, dict):
        raise SchemaError("config must be a JSON object", "")
    _reject_unknown(document, _TOP_KEYS, "")
    circuit = document.get("circuit")
    if circuit not in CIRCUITS:
        raise SchemaError(f"circuit must be one of {sorted(CIRCUITS)}, got {circuit!r}", "circuit")
    raw_params = document.get("params")
    if not isinstance(raw_params, dict):
        raise SchemaError("params must be an object", "params")
    cls = CIRCUITS[circuit]
    allowed = {f.name for f in dataclasses.fields(cls)} - {"raw"}
    _reject_unknown(raw_params, allowed, "params.")
    for name in _REQUIRED[circuit]:
        if name not in raw_params:
            raise SchemaError(f"missing required field 'params.{name}'", f"params.{name}")
    values = {k: _number(v, f"params.{k}") for k, v in raw_params.items()}
    params = validate(cls(**values))
    levels = _integer(document.get("levels", DEFAULT_LEVELS), "levels", 2)
    basis_doc = document.get("basis", {})
    if not isinstance(basis_doc, dict):
        raise SchemaError("basis must be an object", "basis")

    sweep = document.get("sweep")
    if sweep is None:
        basis = _default_basis(circuit, basis_doc, params, params.e_j)
        return PointJob(circuit, params, levels, basis)
    if not isinstance(sweep, dict):
        raise SchemaError("sweep must be an object", "sweep")
    _reject_unknown(sweep, _SWEEP_KEYS, "sweep.")
    for key in _SWEEP_KEYS:
        if key not in sweep:
            raise SchemaError(f"missing required field 'sweep.{key}'", f"sweep.{key}")
    variable = sweep["variable"]
    if variable not in _SWEEPABLE[circuit]:
        raise SchemaError(
            f"sweep.variable for {circuit} must be one of {_SWEEPABLE[circuit]}, got {variable!r}",
            "sweep.variable",
        )
    start = _number(sweep["from"], "sweep.from")
    stop = _number(sweep["to"], "sweep.to")
    if not (math.isfinite(start) and math.isfinite(stop)) or start >= stop:
        raise SchemaError(f"sweep.from must be < sweep.to, got {start} >= {stop}", "sweep.from")
    steps = _integer(sweep["steps"], "sweep.steps", 2)
    max_e_j = params.e_j
    if variable == "ej_over_ec":
        max_e_j = max(params.e_j, stop * params.e_c, 0.0)
    basis = _default_basis(circuit, basis_doc, params, max_e_j)
    return SweepSpec(circuit, params, variable, start, stop, steps, levels, basis)


def load_config(text: str, overrides=()) -> PointJob | SweepSpec:
    """Parse a JSON config document into a point job or a sweep.

    Raises ParseError (with line and column) for malformed JSON and
    SchemaError naming the offending field otherwise.  Parameter range
    errors from validation propagate unchanged.
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}", exc.lineno, exc.colno) from None
    if overrides:
        if not isinstance(document, dict):
            raise SchemaError("config must be a JSON object", "")
        document = apply_overrides(document, overrides)
    return parse_document(document)


def config_to_dict(job: PointJob | SweepSpec) -> dict:
    """Inverse of :func:`parse_document` for fully defaulted jobs."""
    if isinstance(job, SweepSpec):
        doc = {
            "circuit": job.circuit,
            "params": physical_fields(job.base_params),
            "levels": job.levels,
            "sweep": {"variable": job.swept, "from": job.start, "to": job.stop, "steps": job.steps},
            "basis": dict(job.basis),
        }
    else:
        doc = {
            "circuit": job.circuit,
            "params": physical_fields(job.params),
            "levels": job.levels,
            "basis": dict(job.basis),
        }
    return doc


# ---------------------------------------------------------------------------
# Solving


def build_hamiltonian(circuit: str, params: CircuitParams, basis: dict) -> HermitianOperator:
    if circuit == "transmon":
        if basis.get("kind", "charge") == "grid":
            return transmon_twisted_grid_hamiltonian(params, basis.get("n_points", DEFAULT_PERIODIC_POINTS))
        return transmon_charge_hamiltonian(params, basis.get("n_max"))
    if circuit == "fluxonium":
        grid = BoundedGrid(basis.get("x_max", DEFAULT_GRID.x_max), basis.get("n_points", DEFAULT_GRID.n_points))
        return fluxonium_hamiltonian(params, grid)
    if circuit == "zeropi":
        product = ProductBasis(
            PeriodicGrid(basis.get("theta_points", DEFAULT_ZEROPI_BASIS.theta.n_points)),
            BoundedGrid(
                basis.get("x_max", DEFAULT_ZEROPI_BASIS.phi.x_max),
                basis.get("phi_points", DEFAULT_ZEROPI_BASIS.phi.n_points),
            ),
        )
        return zeropi_hamiltonian(params, product)
    raise SchemaError(f"unknown circuit {circuit!r}", "circuit")


def solve(circuit: str, params: CircuitParams, levels: int, basis: dict) -> tuple[Spectrum, QubitReport]:
    """Solve one configuration; at least three levels are computed for f21."""
    op = build_hamiltonian(circuit, params, basis)
    spectrum = lowest_eigenpairs(op, min(max(levels, 3), op.dim))
    return spectrum, qubit_report(spectrum)


def solve_point(job: PointJob) -> tuple[Spectrum, QubitReport]:
    return solve(job.circuit, job.params, job.levels, job.basis)


def _point_params(spec: SweepSpec, value: float) -> CircuitParams:
    base = spec.base_params
    if spec.swept == "ej_over_ec":
        return dataclasses.replace(base, e_j=value * base.e_c, raw=None)
    return dataclasses.replace(base, **{spec.swept: value}, raw=None)


def _run_point(spec: SweepSpec, value: float) -> SweepRecord:
    try:
        params = validate(_point_params(spec, float(value)))
        spectrum, report = solve(spec.circuit, params, spec.levels, spec.basis)
    except (QubitMechError, np.linalg.LinAlgError) as exc:
        return SweepRecord(float(value), error=type(exc).__name__, message=str(exc))
    return SweepRecord(
        swept_value=float(value),
        energies=tuple(float(e) for e in spectrum.energies[: spec.levels]),
        f10=report.f10,
        flux_mat_el=report.flux_mat_el,
        charge_mat_el=report.charge_mat_el,
        disjointness=report.disjointness,
    )


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit value, else QUBITMECH_THREADS, 0 meaning all CPUs."""
    if workers is None:
        text = os.environ.get(THREADS_ENV, "0").strip() or "0"
        try:
            workers = int(text)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {text!r}") from None
    if workers < 0:
        raise ConfigurationError(f"thread count must be >= 0, got {workers}")
    return workers or (os.cpu_count() or 1)


def run_sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    """Solve every point of ``spec``.

    Points run concurrently on up to ``workers`` threads; records come back in
    ascending swept order whatever the completion order.  Failing points are
    kept as error records.
    """
    if not isinstance(spec, SweepSpec):
        raise SchemaError("run_sweep needs a SweepSpec", "sweep")
    if not spec.start < spec.stop or spec.steps < 2:
        raise SchemaError("sweep needs from < to and steps >= 2", "sweep")
    values = spec.values()
    n_workers = min(resolve_workers(workers), len(values))
    if n_workers == 1:
        records = [_run_point(spec, v) for v in values]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = {pool.submit(_run_point, spec, v): i for i, v in enumerate(values)}
            done = {futures[f]: f.result() for f in futures}
        records = [done[i] for i in range(len(values))]
    failed = sum(not r.ok for r in records)
    if failed:
        log.info("%d of %d sweep points failed", failed, len(records))
    metadata = {
        "circuit": spec.circuit,
        "params": physical_fields(spec.base_params),
        "params_raw": spec.base_params.raw,
        "swept": spec.swept,
        "from": spec.start,
        "to": spec.stop,
        "steps": spec.steps,
        "levels": spec.levels,
        "basis": dict(spec.basis),
        "solver": {"dense_tol": DENSE_TOL, "iterative_tol": ITERATIVE_TOL},
        "disjointness_metric": DISJOINTNESS_METRIC,
        "failed_points": failed,
        "code_version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    return SweepResult(spec, records, metadata)


# ---------------------------------------------------------------------------
# Output


def _fmt(value: float) -> str:
    return f"{value:.{CSV_DIGITS}g}"


def csv_header(levels: int) -> list[str]:
    return (
        ["swept_name", "swept_value"]
        + [f"E{i}" for i in range(levels)]
        + ["f10", "flux_mat_el", "charge_mat_el", "disjointness", "error"]
    )


def sidecar_path(destination) -> Path:
    path = Path(destination)
    return path.with_name(path.stem + ".meta.json")


def _open_for_write(destination):
    try:
        return open(destination, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write {destination}: {exc}") from exc


def write_csv(result: SweepResult, destination) -> None:
    """Write one row per sweep point plus a JSON metadata sidecar.

    Floats carry 12 significant digits.  Failed points leave the numeric
    cells empty and name the error class in the ``error`` column.  When
    ``destination`` is a path the sidecar is ``<stem>.meta.json`` next to it.
    """
    levels = result.spec.levels
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(csv_header(levels))
    for rec in result.records:
        row = [result.spec.swept, _fmt(rec.swept_value)]
        if rec.ok:
            row += [_fmt(e) for e in rec.energies]
            row += [_fmt(x) for x in (rec.f10, rec.flux_mat_el, rec.charge_mat_el, rec.disjointness)]
            row.append("")
        else:
            row += [""] * (levels + 4)
            row.append(rec.error)
        writer.writerow(row)
    text = buffer.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with _open_for_write(destination) as fh:
        fh.write(text)
    with _open_for_write(sidecar_path(destination)) as fh:
        json.dump(result.metadata, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_csv(source) -> list[dict]:
    """Parse a sweep CSV back into dictionaries with float fields."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot read {source}: {exc}") from exc
    rows = []
    for row in csv.DictReader(io.StringIO(text)):
        parsed = {}
        for key, value in row.items():
            if key in ("swept_name", "error"):
                parsed[key] = value or None
            else:
                parsed[key] = float(value) if value != "" else None
        rows.append(parsed)
    return rows


def export_wavefunctions(spectrum: Spectrum, levels, destination, scale: float | None = None) -> float:
    """Write wavefunctions of ``levels`` on the grid as CSV.

    Columns are ``x``, ``V``, then ``psi_k = E_k + c * psi_k(x)`` for each
    level (the energy-offset overlay used for potential plots), then the
    unscaled ``raw_psi_k``.  Complex states add ``raw_psi_k_imag``.  The
    scale ``c`` defaults to half the mean spacing of the exported levels
    divided by the largest |psi|; it is returned and recorded in the sidecar.
    """
    basis = spectrum.basis
    if not isinstance(basis, (BoundedGrid, PeriodicGrid)):
        raise UnsupportedBasis("wavefunction export needs a one-dimensional grid")
    levels = [int(k) for k in levels]
    for k in levels:
        if not 0 <= k < spectrum.count:
            raise UnsupportedBasis(f"level {k} was not computed (have {spectrum.count})")
    psis = [spectrum.states[:, k] for k in levels]
    complex_ = any(np.max(np.abs(np.imag(p))) > 1e-12 * np.max(np.abs(p)) for p in psis)
    if scale is None:
        energies = [spectrum.energies[k] for k in levels]
        spacing = (max(energies) - min(energies)) / (len(levels) - 1) if len(levels) > 1 else 0.0
        if spacing <= 0.0:
            spacing = 1.0
        peak = max(float(np.max(np.abs(p))) for p in psis)
        scale = 0.5 * spacing / peak
    x = basis.points
    potential = spectrum.potential if spectrum.potential is not None else np.full(basis.dim, math.nan)
    header = ["x", "V"] + [f"psi_{k}" for k in levels] + [f"raw_psi_{k}" for k in levels]
    if complex_:
        header += [f"raw_psi_{k}_imag" for k in levels]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for i in range(basis.dim):
        row = [_fmt(x[i]), _fmt(potential[i])]
        row += [_fmt(spectrum.energies[k] + scale * p[i].real) for k, p in zip(levels, psis)]
        row += [_fmt(p[i].real) for p in psis]
        if complex_:
            row += [_fmt(p[i].imag) for p in psis]
        writer.writerow(row)
    text = buffer.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
        return scale
    with _open_for_write(destination) as fh:
        fh.write(text)
    meta = {
        "levels": levels,
        "energies": [float(spectrum.energies[k]) for k in levels],
        "scale": scale,
        "scaled_columns": "psi_k = E_k + scale * raw_psi_k",
        "code_version": __version__,
    }
    with _open_for_write(sidecar_path(destination)) as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return scale
