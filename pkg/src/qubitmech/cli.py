"""Command-line front end.

Exit codes: 0 ok, 2 configuration error, 3 solver error, 4 I/O error,
5 self-check failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__, mechanics
from .checks import run_checks
from .core import CIRCUITS
from .errors import ConfigurationError, IoError, QubitMechError, SchemaError, SolverError
from .pipeline import (
    PointJob,
    SweepSpec,
    apply_overrides,
    export_wavefunctions,
    load_config,
    run_sweep,
    solve_point,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_IO = 4
EXIT_CHECK = 5

_E2M = {
    "transmon": (mechanics.transmon_e2m, "length_L"),
    "fluxonium": (mechanics.fluxonium_e2m, "half_length_l"),
    "zeropi": (mechanics.zeropi_e2m, "length_L"),
}
_M2E = {
    "transmon": (mechanics.transmon_m2e, mechanics.TransmonMech),
    "fluxonium": (mechanics.fluxonium_m2e, mechanics.FluxoniumMech),
    "zeropi": (mechanics.zeropi_m2e, mechanics.ZeroPiMech),
}


def _err(message: str) -> None:
    print(f"qubitmech: {message}", file=sys.stderr)


def _read_config_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc}", "config") from exc


def _load(args, expect):
    job = load_config(_read_config_text(args.config), args.set)
    if not isinstance(job, expect):
        kind = "a sweep section" if expect is SweepSpec else "no sweep section"
        raise SchemaError(f"this command needs a config with {kind}", "sweep")
    return job


def _fmt(x: float) -> str:
    return "nan" if math.isnan(x) else f"{x:.10g}"


def cmd_spectrum(args) -> int:
    job = _load(args, PointJob)
    if args.levels is not None:
        if args.levels < 2:
            raise SchemaError("--levels must be >= 2", "levels")
        job = dataclasses.replace(job, levels=args.levels)
    spectrum, report = solve_point(job)
    energies = spectrum.energies[: job.levels]
    print(f"circuit {job.circuit}  basis {type(spectrum.basis).__name__}  solver {spectrum.method}")
    for i, e in enumerate(energies):
        print(f"E{i} = {_fmt(e)} GHz")
    for name, value in dataclasses.asdict(report).items():
        print(f"{name} = {_fmt(value)}")
    if args.out:
        try:
            with open(args.out, "w", newline="", encoding="utf-8") as fh:
                fh.write("level,energy\n")
                for i, e in enumerate(energies):
                    fh.write(f"{i},{e:.12g}\n")
        except OSError as exc:
            raise IoError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _load(args, SweepSpec)
    result = run_sweep(spec, args.threads)
    write_csv(result, args.out)
    n = len(result.records)
    if result.failures == n:
        _err(f"all {n} sweep points failed")
        return EXIT_SOLVER
    if result.failures:
        _err(f"warning: {result.failures} of {n} sweep points failed (see error column)")
    print(f"wrote {n} points to {args.out}")
    return EXIT_OK


def cmd_wavefunctions(args) -> int:
    job = _load(args, PointJob)
    try:
        levels = [int(x) for x in args.levels.split(",") if x.strip()]
    except ValueError:
        raise SchemaError(f"--levels must be a comma-separated list of integers, got {args.levels!r}", "levels") from None
    if not levels or min(levels) < 0:
        raise SchemaError("--levels needs non-negative level indices", "levels")
    job = dataclasses.replace(job, levels=max(job.levels, max(levels) + 1))
    spectrum, _ = solve_point(job)
    scale = export_wavefunctions(spectrum, levels, args.out)
    print(f"wrote levels {levels} to {args.out} (scale {scale:.6g})")
    return EXIT_OK


def cmd_map(args) -> int:
    try:
        doc = json.loads(_read_config_text(args.config))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON at line {exc.lineno}: {exc.msg}", "config") from None
    if not isinstance(doc, dict):
        raise SchemaError("map config must be a JSON object", "config")
    doc = apply_overrides(doc, args.set)
    if args.direction == "e2m":
        func, geometry = _E2M[args.circuit]
        if geometry not in doc:
            raise SchemaError(f"e2m for {args.circuit} needs geometry field {geometry!r}", geometry)
        length = doc.pop(geometry)
        cls = CIRCUITS[args.circuit]
        allowed = {f.name for f in dataclasses.fields(cls)} - {"raw"}
        unknown = set(doc) - allowed
        if unknown:
            raise SchemaError(f"unknown field {sorted(unknown)[0]!r}", sorted(unknown)[0])
        try:
            out = func(cls(**doc), float(length))
        except TypeError as exc:
            raise SchemaError(str(exc), "params") from None
    else:
        func, cls = _M2E[args.circuit]
        allowed = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - allowed
        if unknown:
            raise SchemaError(f"unknown field {sorted(unknown)[0]!r}", sorted(unknown)[0])
        try:
            out = func(cls(**{k: float(v) for k, v in doc.items()}))
        except (TypeError, ValueError) as exc:
            raise SchemaError(str(exc), "params") from None
    fields = {k: v for k, v in dataclasses.asdict(out).items() if k != "raw"}
    print(json.dumps(fields, indent=2))
    return EXIT_OK


def cmd_check(args) -> int:
    results = run_checks(fault=args.inject_fault)
    for r in results:
        print(r.line())
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qubitmech", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p):
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument(
            "--set", action="append", default=[], metavar="KEY=VALUE",
            help="override a config entry by dotted key, e.g. params.phi_ext=3.14159",
        )
        return p

    p = with_config(sub.add_parser("spectrum", help="solve a single configuration"))
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--out", default=None, help="optional CSV of level energies")
    p.set_defaults(func=cmd_spectrum)

    p = with_config(sub.add_parser("sweep", help="run a parameter sweep to CSV"))
    p.add_argument("--out", required=True)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: $QUBITMECH_THREADS, 0 = all CPUs)")
    p.set_defaults(func=cmd_sweep)

    p = with_config(sub.add_parser("wavefunctions", help="export wavefunctions on the grid"))
    p.add_argument("--levels", default="0,1,2,3")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_wavefunctions)

    p = with_config(sub.add_parser("map", help="convert between electrical and mechanical parameters"))
    p.add_argument("--direction", choices=("e2m", "m2e"), required=True)
    p.add_argument("--circuit", choices=sorted(CIRCUITS), required=True)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("check", help="run the built-in invariant suite")
    p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="qubitmech: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except IoError as exc:
        _err(f"IoError: {exc}")
        return EXIT_IO
    except ConfigurationError as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_CONFIG
    except (SolverError, QubitMechError) as exc:
        _err(f"{type(exc).__name__}: {exc}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
