"""Parameter sweeps over well width and applied field, with CSV/gnuplot output.

Sweep points are independent work items run on a bounded thread pool
(VALLEYSPLIT_THREADS caps the size); results are assembled in grid order, so
repeated runs of the same configuration produce byte-identical files.  A
failing point is recorded in the `error` column and never aborts the sweep.
"""

from __future__ import annotations

import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from math import floor, nan

from . import coupling, fem, potential
from .materials import (MaterialSystem, PRESETS, material_from_config,
                        valley_pair_constants)

CSV_HEADER = ("material", "W_nm", "F_V_per_m", "n", "E_meV", "delta_meV",
              "lower_meV", "upper_meV", "CV_meV", "CF_meV", "Cdelta_meV",
              "bulk_meV", "error")


@dataclass(frozen=True)
class ResultRow:
    """One (width, field, subband) result in output units (meV)."""

    material: str
    w_nm: float
    f_v_per_m: float
    n: int
    e_mev: float = nan
    delta_mev: float = nan
    lower_mev: float = nan
    upper_mev: float = nan
    cv_mev: float = nan
    cf_mev: float = nan
    cdelta_mev: float = nan
    bulk_mev: float = nan
    error: str = ""


_DEFAULTS = {
    "well_nm": 6.0,
    "barrier_nm": 6.0,
    "field_V_per_m": 0.0,
    "subbands": 1,
    "mesh_h_nm": 0.05,
    "constants_mode": "canonical",
    "gradient_coupling": "quadrature",
    "well_only": False,
}


@dataclass(frozen=True)
class SweepConfig:
    """Resolved sweep configuration (defaults merged in)."""

    material: MaterialSystem
    widths_nm: tuple
    fields_v_per_m: tuple
    barrier_nm: float = 6.0
    subbands: int = 1
    mesh_h_nm: float = 0.05
    constants_mode: str = "canonical"
    gradient_coupling: str = "quadrature"
    well_only: bool = False
    out_csv: str | None = None
    out_gnuplot: str | None = None

    def __post_init__(self) -> None:
        if not self.widths_nm or not self.fields_v_per_m:
            raise ValueError("width and field grids must be non-empty")
        if self.subbands < 1:
            raise ValueError("need at least one subband")
        if self.mesh_h_nm <= 0:
            raise ValueError("mesh size must be positive")
        if self.gradient_coupling not in ("quadrature", "aligned"):
            raise ValueError("gradient_coupling must be 'quadrature' or 'aligned'")

    def constants(self):
        return valley_pair_constants(self.material, self.constants_mode)

    def replace(self, **kwargs) -> "SweepConfig":
        return replace(self, **kwargs)

    def to_dict(self) -> dict:
        """Effective configuration as a JSON-ready dict (round-trips exactly)."""
        m = self.material
        return {
            "material": {
                "preset": m.name,
                "m_z_well": m.m_z_well,
                "m_z_barrier": m.m_z_barrier,
                "delta_Ec_eV": m.delta_ec_ev,
                "lattice_nm": m.lattice_nm,
                "k0_fraction": m.k0_fraction,
            },
            "geometry": {"well_nm": self.widths_nm[0],
                         "barrier_nm": self.barrier_nm},
            "widths_nm": list(self.widths_nm),
            "field_V_per_m": self.fields_v_per_m[0],
            "fields_V_per_m": list(self.fields_v_per_m),
            "subbands": self.subbands,
            "mesh_h_nm": self.mesh_h_nm,
            "constants_mode": self.constants_mode,
            "gradient_coupling": self.gradient_coupling,
            "well_only": self.well_only,
            "output": {"csv": self.out_csv, "gnuplot": self.out_gnuplot},
        }


def _expand_grid(value, name: str) -> tuple:
    """A grid is either an explicit list or {"start", "stop", "step"}."""
    if isinstance(value, dict):
        try:
            start, stop, step = (float(value["start"]), float(value["stop"]),
                                 float(value["step"]))
        except KeyError as exc:
            raise ValueError(f"{name}: range needs start/stop/step") from exc
        if step <= 0 or stop < start:
            raise ValueError(f"{name}: need step > 0 and stop >= start")
        count = int(floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(count))
    grid = tuple(float(v) for v in value)
    if not grid:
        raise ValueError(f"{name}: grid must be non-empty")
    return grid


def config_from_dict(cfg: dict) -> SweepConfig:
    """Parse the JSON configuration; unknown top-level keys are rejected."""
    known = {"material", "geometry", "widths_nm", "field_V_per_m",
             "fields_V_per_m", "subbands", "mesh_h_nm", "constants_mode",
             "gradient_coupling", "well_only", "output", "_comment"}
    unknown = set(cfg) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")

    material = material_from_config(cfg.get("material", {}))
    geometry = cfg.get("geometry", {})
    well = float(geometry.get("well_nm", _DEFAULTS["well_nm"]))
    barrier = float(geometry.get("barrier_nm", _DEFAULTS["barrier_nm"]))
    field_v = float(cfg.get("field_V_per_m", _DEFAULTS["field_V_per_m"]))
    widths = (_expand_grid(cfg["widths_nm"], "widths_nm")
              if "widths_nm" in cfg else (well,))
    fields = (_expand_grid(cfg["fields_V_per_m"], "fields_V_per_m")
              if "fields_V_per_m" in cfg else (field_v,))
    output = cfg.get("output", {}) or {}
    return SweepConfig(
        material=material,
        widths_nm=widths,
        fields_v_per_m=fields,
        barrier_nm=barrier,
        subbands=int(cfg.get("subbands", _DEFAULTS["subbands"])),
        mesh_h_nm=float(cfg.get("mesh_h_nm", _DEFAULTS["mesh_h_nm"])),
        constants_mode=str(cfg.get("constants_mode", _DEFAULTS["constants_mode"])),
        gradient_coupling=str(cfg.get("gradient_coupling",
                                       _DEFAULTS["gradient_coupling"])),
        well_only=bool(cfg.get("well_only", _DEFAULTS["well_only"])),
        out_csv=output.get("csv"),
        out_gnuplot=output.get("gnuplot"),
    )


def pool_size() -> int:
    env = os.environ.get("VALLEYSPLIT_THREADS", "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("VALLEYSPLIT_THREADS must be >= 1")
        return n
    return min(8, os.cpu_count() or 1)


def solve_point(config: SweepConfig, w_nm: float,
                f_v_per_m: float) -> list[ResultRow]:
    """All subband rows of a single (width, field) grid point."""
    name = config.material.name
    try:
        geometry = potential.WellGeometry(w_nm, config.barrier_nm)
        profile = potential.build_profile(geometry, config.material, f_v_per_m)
        mesh = fem.build_mesh(geometry, config.mesh_h_nm)
        solution = fem.solve(fem.assemble(mesh, profile, config.material),
                             config.subbands)
        constants = config.constants()
        bulk = coupling.bulk_inversion_estimate(field_v_per_m=abs(f_v_per_m))
        rows = []
        for n in range(config.subbands):
            res = coupling.valley_splitting(
                solution, n, profile, constants,
                gradient_coupling=config.gradient_coupling,
                well_only=config.well_only)
            lv = coupling.coupled_levels(solution.energies[n], res)
            rows.append(ResultRow(
                material=name, w_nm=w_nm, f_v_per_m=f_v_per_m, n=n,
                e_mev=1e3 * solution.energies[n],
                delta_mev=res.delta_mev,
                lower_mev=1e3 * lv.lower_ev,
                upper_mev=1e3 * lv.upper_ev,
                cv_mev=1e3 * abs(res.c_confinement),
                cf_mev=1e3 * abs(res.c_field),
                cdelta_mev=1e3 * abs(res.c_interface),
                bulk_mev=bulk,
            ))
        return rows
    except Exception as exc:  # isolate the failing point, keep sweeping
        return [ResultRow(material=name, w_nm=w_nm, f_v_per_m=f_v_per_m, n=n,
                          error=f"{type(exc).__name__}: {exc}")
                for n in range(config.subbands)]


def _run_grid(config: SweepConfig, points: list) -> list[ResultRow]:
    with ThreadPoolExecutor(max_workers=pool_size()) as pool:
        chunks = list(pool.map(lambda p: solve_point(config, *p), points))
    return [row for chunk in chunks for row in chunk]


def run_width_sweep(config: SweepConfig) -> list[ResultRow]:
    """One row per (width, subband) at the fixed field, in grid order."""
    f = config.fields_v_per_m[0]
    return _run_grid(config, [(w, f) for w in config.widths_nm])


def run_field_sweep(config: SweepConfig) -> list[ResultRow]:
    """One row per (field, subband) at the fixed width, in grid order."""
    w = config.widths_nm[0]
    return _run_grid(config, [(w, f) for f in config.fields_v_per_m])


def _fmt(x: float) -> str:
    return format(x, ".9g")


def emit_csv(rows: list[ResultRow], path) -> None:
    """RFC 4180 CSV with a fixed header; floats at 9 significant digits."""
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="", encoding="ascii") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow([
                r.material, _fmt(r.w_nm), _fmt(r.f_v_per_m), r.n,
                _fmt(r.e_mev), _fmt(r.delta_mev), _fmt(r.lower_mev),
                _fmt(r.upper_mev), _fmt(r.cv_mev), _fmt(r.cf_mev),
                _fmt(r.cdelta_mev), _fmt(r.bulk_mev), r.error,
            ])


def parse_csv(path) -> list[dict]:
    """Read back an emitted CSV into dict rows (strings preserved)."""
    with open(path, "r", newline="", encoding="ascii") as fh:
        reader = csv.DictReader(fh)
        return list(reader)


_FIGURE_KIND = {"fig1": "width", "fig2": "width", "fig3": "field",
                "fig4": "width"}


def _subbands_in(rows) -> list[int]:
    return sorted({r.n for r in rows})


def emit_gnuplot(rows: list[ResultRow], figure: str, path,
                 csv_path=None) -> None:
    """Self-contained plotting script for one of the standard figures.

    Width figures use angstrom on the x axis; the field figure uses V/m.
    The script references the CSV emitted alongside (same stem by default).
    """
    if figure not in _FIGURE_KIND:
        raise ValueError(f"unknown figure {figure!r}")
    if not rows:
        raise ValueError("no rows to plot")
    widths = sorted({r.w_nm for r in rows})
    fields = sorted({r.f_v_per_m for r in rows})
    kind = _FIGURE_KIND[figure]
    if kind == "width" and (len(widths) < 2 or len(fields) != 1):
        raise ValueError(f"{figure} expects a width sweep at a single field")
    if kind == "field" and (len(fields) < 2 or len(widths) != 1):
        raise ValueError(f"{figure} expects a field sweep at a single width")

    csv_name = os.path.basename(csv_path) if csv_path else \
        os.path.splitext(os.path.basename(str(path)))[0] + ".csv"
    png_name = os.path.splitext(os.path.basename(str(path)))[0] + ".png"
    ns = _subbands_in(rows)

    lines = [
        f"# {figure}: reconstructed sweep (grids are reconstructions, not originals)",
        "set datafile separator ','",
        "set terminal pngcairo size 900,600",
        f"set output '{png_name}'",
        "set grid",
    ]
    # column indices (1-based): 2 W_nm, 3 F, 5 E, 6 delta, 7 lower, 8 upper
    if figure == "fig1":
        lines += [
            "set xlabel 'well width (angstrom)'",
            "set ylabel 'valley splitting (meV)'",
            "set key off",
            f"plot '{csv_name}' skip 1 using ($2*10):6 with lines lw 2",
        ]
    elif figure == "fig2":
        plots_a = ", ".join(
            f"'{csv_name}' skip 1 using ($4=={n}?$2*10:1/0):5 with lines "
            f"title 'n={n} uncoupled'" for n in ns)
        plots_b = ", ".join(
            f"'{csv_name}' skip 1 using ($4=={n}?$2*10:1/0):{col} with lines "
            f"title 'n={n} {lab}'"
            for n in ns for col, lab in ((7, "lower"), (8, "upper")))
        lines += [
            "set multiplot layout 2,1",
            "set xlabel 'well width (angstrom)'",
            "set ylabel 'E_n (meV), uncoupled'",
            f"plot {plots_a}",
            "set ylabel 'E_n (meV), coupled pair'",
            f"plot {plots_b}",
            "unset multiplot",
        ]
    elif figure == "fig3":
        plots = ", ".join(
            f"'{csv_name}' skip 1 using ($4=={n}?$3:1/0):{col} with lines "
            f"title 'n={n} {lab}'"
            for n in ns for col, lab in ((7, "lower"), (8, "upper")))
        lines += [
            "set xlabel 'applied field (V/m)'",
            "set ylabel 'subband levels (meV)'",
            f"plot {plots}",
        ]
    else:  # fig4
        plots = ", ".join(
            f"'{csv_name}' skip 1 using ($4=={n}?$2*10:1/0):6 with lines "
            f"title 'n={n}'" for n in ns)
        lines += [
            "set xlabel 'well width (angstrom)'",
            "set ylabel 'valley splitting (meV)'",
            f"plot {plots}",
        ]
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


FIGURE_PRESETS: dict[str, dict] = {
    "fig1": {
        "_comment": "ground-state splitting vs width, zero field (reconstruction)",
        "material": {"preset": "sige30_si"},
        "geometry": {"barrier_nm": 6.0},
        "widths_nm": {"start": 2.0, "stop": 10.0, "step": 0.05},
        "field_V_per_m": 0.0,
        "subbands": 1,
    },
    "fig2": {
        "_comment": "subband levels vs width at 1e7 V/m (reconstruction)",
        "material": {"preset": "sio2_si"},
        "geometry": {"barrier_nm": 6.0},
        "widths_nm": {"start": 2.0, "stop": 10.0, "step": 0.05},
        "field_V_per_m": 1e7,
        "subbands": 3,
    },
    "fig3": {
        "_comment": "subband levels vs field, 6 nm well (reconstruction)",
        "material": {"preset": "sio2_si"},
        "geometry": {"well_nm": 6.0, "barrier_nm": 6.0},
        "fields_V_per_m": {"start": 0.0, "stop": 1.5e8, "step": 2.5e6},
        "subbands": 2,
    },
    "fig4": {
        "_comment": "splitting vs width and subband at 1e8 V/m (reconstruction)",
        "material": {"preset": "sio2_si"},
        "geometry": {"barrier_nm": 6.0},
        "widths_nm": {"start": 4.0, "stop": 10.0, "step": 0.05},
        "field_V_per_m": 1e8,
        "subbands": 3,
    },
}


def run_figure(figure: str, config: SweepConfig) -> list[ResultRow]:
    if figure not in _FIGURE_KIND:
        raise ValueError(f"unknown figure {figure!r}")
    if _FIGURE_KIND[figure] == "width":
        return run_width_sweep(config)
    return run_field_sweep(config)
