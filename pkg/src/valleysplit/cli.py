"""Command-line interface: sweeps, figure reconstruction, oracle runner.

Subcommands: sweep-width, sweep-field, figure {fig1..fig4}, oracles,
print-config.  Exit codes: 0 success, 1 usage error, 2 oracle failure,
3 I/O error.  Identical configurations produce byte-identical output files;
VALLEYSPLIT_THREADS bounds the sweep worker pool.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import sweeps
from .oracles import run_oracles
from .sweeps import (FIGURE_PRESETS, SweepConfig, config_from_dict, emit_csv,
                     emit_gnuplot, run_field_sweep, run_figure,
                     run_width_sweep)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ORACLE = 2
EXIT_IO = 3

_DEFAULT_WIDTH_GRID = {"start": 2.0, "stop": 10.0, "step": 0.05}
_DEFAULT_FIELD_GRID = {"start": 0.0, "stop": 1.5e8, "step": 2.5e6}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems must map to exit code 1
        raise _UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON configuration file")
    p.add_argument("--material", choices=("sio2_si", "sige30_si"),
                   help="material preset")
    p.add_argument("--well-nm", type=float, help="well width (nm)")
    p.add_argument("--barrier-nm", type=float, help="barrier width (nm)")
    p.add_argument("--field", type=float, help="applied field (V/m)")
    p.add_argument("--subbands", type=int, help="number of subbands")
    p.add_argument("--mesh-h", type=float, help="target element size (nm)")
    p.add_argument("--constants-mode", choices=("canonical", "analytic"),
                   help="coupling-constant mode")
    p.add_argument("--gradient-sign", type=int, choices=(-1, 1),
                   help="orientation of the dV/dz channel (default -1)")
    p.add_argument("--width-range", metavar="START:STOP:STEP",
                   help="width grid in nm")
    p.add_argument("--field-range", metavar="START:STOP:STEP",
                   help="field grid in V/m")
    p.add_argument("--out", help="output CSV path (or directory for figures)")
    p.add_argument("--gnuplot", help="also write a gnuplot script here")


def build_parser() -> _Parser:
    parser = _Parser(prog="valleysplit",
                     description="Si quantum well subbands and valley splitting")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("sweep-width", "splitting vs well width"),
                        ("sweep-field", "splitting vs applied field"),
                        ("oracles", "run the self-check battery"),
                        ("print-config", "print the merged configuration")):
        _add_common(sub.add_parser(name, help=help_))
    fig = sub.add_parser("figure", help="reconstruct a standard figure")
    fig.add_argument("name", choices=sorted(FIGURE_PRESETS))
    _add_common(fig)
    return parser


def _parse_range(text: str, name: str) -> dict:
    parts = text.split(":")
    if len(parts) != 3:
        raise _UsageError(f"{name} must be START:STOP:STEP")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise _UsageError(f"{name}: {exc}") from exc
    return {"start": start, "stop": stop, "step": step}


def merged_config_dict(args, base: dict | None = None) -> dict:
    """defaults < config file < command-line flags."""
    cfg: dict = dict(base or {})
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        for key, value in file_cfg.items():
            if isinstance(value, dict) and isinstance(cfg.get(key), dict):
                cfg[key] = {**cfg[key], **value}
            else:
                cfg[key] = value
    material = dict(cfg.get("material", {}))
    if args.material:
        material = {"preset": args.material}
    if material:
        cfg["material"] = material
    geometry = dict(cfg.get("geometry", {}))
    if args.well_nm is not None:
        geometry["well_nm"] = args.well_nm
    if args.barrier_nm is not None:
        geometry["barrier_nm"] = args.barrier_nm
    if geometry:
        cfg["geometry"] = geometry
    if args.field is not None:
        cfg["field_V_per_m"] = args.field
        cfg.pop("fields_V_per_m", None)
    if args.subbands is not None:
        cfg["subbands"] = args.subbands
    if args.mesh_h is not None:
        cfg["mesh_h_nm"] = args.mesh_h
    if args.constants_mode is not None:
        cfg["constants_mode"] = args.constants_mode
    if args.gradient_sign is not None:
        cfg["gradient_sign"] = args.gradient_sign
    if args.width_range:
        cfg["widths_nm"] = _parse_range(args.width_range, "--width-range")
    if args.field_range:
        cfg["fields_V_per_m"] = _parse_range(args.field_range, "--field-range")
    if args.well_nm is not None and "widths_nm" not in cfg:
        cfg["widths_nm"] = [args.well_nm]
    return cfg


def _resolve(args, kind: str) -> SweepConfig:
    cfg = merged_config_dict(args)
    if kind == "width" and "widths_nm" not in cfg:
        cfg["widths_nm"] = dict(_DEFAULT_WIDTH_GRID)
    if kind == "field" and "fields_V_per_m" not in cfg:
        cfg["fields_V_per_m"] = dict(_DEFAULT_FIELD_GRID)
    try:
        return config_from_dict(cfg)
    except (ValueError, KeyError, TypeError) as exc:
        raise _UsageError(str(exc)) from exc


def _write_outputs(rows, config: SweepConfig, args, default_csv: str,
                   figure: str | None = None) -> None:
    csv_path = args.out or config.out_csv or default_csv
    emit_csv(rows, csv_path)
    print(f"wrote {len(rows)} rows -> {csv_path}")
    gp_path = args.gnuplot or config.out_gnuplot
    if gp_path and figure:
        emit_gnuplot(rows, figure, gp_path, csv_path=csv_path)
        print(f"wrote gnuplot script -> {gp_path}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "sweep-width":
            config = _resolve(args, "width")
            rows = run_width_sweep(config)
            _write_outputs(rows, config, args, "sweep_width.csv")
        elif args.command == "sweep-field":
            config = _resolve(args, "field")
            rows = run_field_sweep(config)
            _write_outputs(rows, config, args, "sweep_field.csv")
        elif args.command == "figure":
            config = _resolve_figure(args)
            rows = run_figure(args.name, config)
            out_dir = args.out or "."
            os.makedirs(out_dir, exist_ok=True)
            csv_path = os.path.join(out_dir, f"{args.name}.csv")
            gp_path = os.path.join(out_dir, f"{args.name}.gp")
            emit_csv(rows, csv_path)
            emit_gnuplot(rows, args.name, gp_path, csv_path=csv_path)
            print(f"wrote {len(rows)} rows -> {csv_path}")
            print(f"wrote gnuplot script -> {gp_path}")
        elif args.command == "oracles":
            config = _resolve(args, "point")
            report = run_oracles(config)
            for line in report.lines():
                print(line)
            return EXIT_OK if report.passed else EXIT_ORACLE
        elif args.command == "print-config":
            config = _resolve(args, "point")
            print(json.dumps(config.to_dict(), indent=2, sort_keys=True))
        return EXIT_OK
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def _resolve_figure(args) -> SweepConfig:
    base = FIGURE_PRESETS[args.name]
    cfg = merged_config_dict(args, base=base)
    try:
        return config_from_dict(cfg)
    except (ValueError, KeyError, TypeError) as exc:
        raise _UsageError(str(exc)) from exc


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
