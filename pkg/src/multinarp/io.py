"""Config parsing, CSV export, SVG rendering and the command line.

File formats
------------
Map CSV: a ``# key = value`` metadata comment block echoing the full
sweep parameterization and tool version, then a header row and one data
row per (theta, axis value, emitter) cell::

    theta_rad,spacing_mev,emitter_index,occupation

Pulse CSVs carry (omega_mev | t_ps, re, im) columns; trajectory CSVs
carry (t_ps, rho11, re_rho01, im_rho01).  All numbers are written with
shortest round-trip precision, so parsing a written file reproduces the
stored values exactly.

Config files are INI-style ``key = value`` text with sections (see
README for the grammar).  Validation happens before any compute and
unknown keys are rejected.

Exit codes: 0 success, 2 configuration/usage error (one line,
``error: config: <section.key>: <reason>``), 3 numerical failure (one
line with the failing cell coordinates).
"""

from __future__ import annotations

import argparse
import configparser
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .constants import HBAR_MEV_PS
from .dynamics import EmitterParams, IntegrationError, Trajectory, integrate
from .phonon import (
    DEFAULT_COUPLING_PS2,
    DEFAULT_CUTOFF_MEV,
    DEFAULT_TEMPERATURE_K,
    PhononEnvironment,
)
from .pulseshape import (
    ChirpSpec,
    FrequencyGrid,
    GridError,
    NotchSpec,
    SpectralPulse,
    SynthesisError,
    TemporalPulse,
    apply_notch_mask,
    apply_phase_mask,
    default_grid,
    make_gaussian_spectrum,
    synthesize,
)
from .sweep import (
    OccupationMap,
    SweepCellError,
    SweepSpec,
    flip_chirp,
    preset,
    preset_names,
    run_sweep,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "read_config",
    "write_map_csv",
    "read_map_csv",
    "write_pulse_csv",
    "write_spectrum_csv",
    "write_trajectory_csv",
    "render_heatmap",
    "render_linecut",
    "cli_main",
    "main",
]


class ConfigError(ValueError):
    """Invalid run configuration; str() carries the offending key path."""


# ---------------------------------------------------------------------------
# run configuration


_SCHEMA = {
    "sweep": {
        "preset": str,
        "n_emitters": int,
        "tau0_ps": float,
        "chirp_ps2": float,
        "notch_width_mev": float,
        "axis": str,
        "spacing_min_mev": float,
        "spacing_max_mev": float,
        "spacing_points": int,
        "width_min_mev": float,
        "width_max_mev": float,
        "width_points": int,
        "spacing_mev": float,
        "theta_min_rad": float,
        "theta_max_rad": float,
        "theta_points": int,
        "carrier_mev": float,
        "dipole_scales": str,
        "exploit_symmetry": bool,
    },
    "phonons": {
        "enabled": bool,
        "temperature_k": float,
        "coupling_ps2": float,
        "cutoff_mev": float,
    },
    "grid": {
        "n_points": int,
        "span_mev": float,
    },
    "integrator": {
        "refine": int,
    },
    "output": {
        "directory": str,
        "emit_plots": bool,
        "workers": int,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated sweep job: a SweepSpec plus output options."""

    spec: SweepSpec
    output_dir: str = "."
    emit_plots: bool = True
    workers: int | None = None
    label: str = "sweep"


def _parse_bool(section, key, raw):
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}")


def _typed(section, key, raw, typ):
    if typ is bool:
        return _parse_bool(section, key, raw)
    try:
        return typ(raw)
    except ValueError as exc:
        raise ConfigError(f"{section}.{key}: {exc}") from None


def read_config(path: str) -> RunConfig:
    """Parse and validate an INI run configuration (fail-fast)."""
    if not os.path.isfile(path):
        raise ConfigError(f"{path}: no such config file")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None

    values: dict[str, dict] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{section}: unknown section")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{section}.{key}: unknown key")
            values[section][key] = _typed(section, key, raw, _SCHEMA[section][key])

    sw = values.get("sweep", {})
    spec = None
    if "preset" in sw:
        name = sw["preset"]
        if name not in preset_names():
            raise ConfigError(
                f"sweep.preset: unknown preset {name!r} "
                f"(known: {', '.join(preset_names())})")
        spec = preset(name)

    def grid_axis(prefix):
        keys = [f"{prefix}_min_mev", f"{prefix}_max_mev", f"{prefix}_points"]
        present = [k for k in keys if k in sw]
        if not present:
            return None
        if len(present) != 3:
            raise ConfigError(
                f"sweep.{present[0]}: give all of {', '.join(keys)} or none")
        lo, hi, n = (sw[k] for k in keys)
        if n < 1 or (n > 1 and hi <= lo):
            raise ConfigError(f"sweep.{prefix}_points: invalid axis grid")
        return tuple(np.linspace(lo, hi, n))

    try:
        overrides = {}
        if "n_emitters" in sw:
            overrides["n_emitters"] = sw["n_emitters"]
        for k in ("tau0_ps", "chirp_ps2", "notch_width_mev", "carrier_mev",
                  "spacing_mev", "exploit_symmetry"):
            if k in sw:
                overrides[k] = sw[k]
        if "dipole_scales" in sw:
            try:
                overrides["dipole_scales"] = tuple(
                    float(v) for v in sw["dipole_scales"].split(","))
            except ValueError:
                raise ConfigError(
                    "sweep.dipole_scales: expected comma-separated numbers")
        theta_keys = [k for k in ("theta_min_rad", "theta_max_rad", "theta_points")
                      if k in sw]
        if theta_keys and len(theta_keys) != 3:
            raise ConfigError(
                "sweep.theta_min_rad: give all of theta_min_rad, "
                "theta_max_rad, theta_points or none")
        if theta_keys:
            if sw["theta_points"] < 1:
                raise ConfigError("sweep.theta_points: must be >= 1")
            overrides["theta_grid_rad"] = tuple(
                np.linspace(sw["theta_min_rad"], sw["theta_max_rad"],
                            sw["theta_points"]))
        spacing_axis = grid_axis("spacing")
        width_axis = grid_axis("width")
        axis = sw.get("axis")
        if axis is not None and axis not in ("spacing", "width"):
            raise ConfigError("sweep.axis: must be 'spacing' or 'width'")
        if spacing_axis is not None:
            overrides["spacing_grid_mev"] = spacing_axis
            overrides["width_grid_mev"] = None
        if width_axis is not None:
            overrides["width_grid_mev"] = width_axis
            overrides["spacing_grid_mev"] = None

        ph = values.get("phonons", {})
        if ph:
            enabled = ph.get("enabled", True)
            overrides["phonons"] = PhononEnvironment(
                temperature_K=ph.get("temperature_k", DEFAULT_TEMPERATURE_K),
                coupling_ps2=ph.get("coupling_ps2", DEFAULT_COUPLING_PS2),
                cutoff_mev=ph.get("cutoff_mev", DEFAULT_CUTOFF_MEV),
                enabled=enabled,
            )
        gr = values.get("grid", {})
        if gr:
            tau0 = overrides.get("tau0_ps", spec.tau0_ps if spec else 0.120)
            center = overrides.get("carrier_mev", spec.carrier_mev if spec else 0.0)
            base = default_grid(tau0, center_mev=center)
            overrides["grid"] = FrequencyGrid(
                center_mev=center,
                span_mev=gr.get("span_mev", base.span_mev),
                n_points=gr.get("n_points", base.n_points),
            )
        integ = values.get("integrator", {})
        if "refine" in integ:
            overrides["refine"] = integ["refine"]

        if spec is None:
            required = ("n_emitters", "theta_grid_rad")
            missing = [k for k in required if k not in overrides]
            if missing or ("spacing_grid_mev" not in overrides
                           and "width_grid_mev" not in overrides):
                raise ConfigError(
                    "sweep: without a preset, n_emitters, the theta grid and "
                    "one of the spacing/width grids are required")
            spec = SweepSpec(**overrides)
        elif overrides:
            spec = replace(spec, **overrides)
    except (ValueError, GridError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"sweep: {exc}") from None

    out = values.get("output", {})
    label = sw.get("preset", "sweep")
    return RunConfig(
        spec=spec,
        output_dir=out.get("directory", "."),
        emit_plots=out.get("emit_plots", True),
        workers=out.get("workers"),
        label=label,
    )


# ---------------------------------------------------------------------------
# CSV


def _fmt(x) -> str:
    return repr(float(x))


def _metadata_lines(meta: dict) -> list[str]:
    lines = []
    for key, val in meta.items():
        if isinstance(val, (tuple, list)):
            val = ",".join(str(v) for v in val)
        lines.append(f"# {key} = {val}")
    return lines


def write_map_csv(map_: OccupationMap, path: str) -> None:
    """One row per (theta, axis value, emitter); metadata in comments."""
    axis_col = map_.axis_name
    with open(path, "w", newline="") as fh:
        for line in _metadata_lines(map_.metadata):
            fh.write(line + "\n")
        fh.write(f"theta_rad,{axis_col},emitter_index,occupation\n")
        for i, theta in enumerate(map_.theta_rad):
            for j, val in enumerate(map_.axis_values_mev):
                for k in range(map_.n_emitters):
                    fh.write(
                        f"{_fmt(theta)},{_fmt(val)},{k + 1},"
                        f"{_fmt(map_.occupations[i, j, k])}\n")


def read_map_csv(path: str) -> OccupationMap:
    """Inverse of write_map_csv, exact to stored precision."""
    meta: dict = {}
    rows = []
    axis_col = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                if "=" in line:
                    key, _, val = line[1:].partition("=")
                    meta[key.strip()] = val.strip()
                continue
            if axis_col is None:
                cols = line.split(",")
                if cols[0] != "theta_rad" or len(cols) != 4:
                    raise ValueError(f"{path}: unexpected header {line!r}")
                axis_col = cols[1]
                continue
            t, v, k, occ = line.split(",")
            rows.append((float(t), float(v), int(k), float(occ)))
    if axis_col is None or not rows:
        raise ValueError(f"{path}: no data rows")
    thetas = sorted({r[0] for r in rows})
    vals = sorted({r[1] for r in rows})
    n_em = max(r[2] for r in rows)
    occ = np.full((len(thetas), len(vals), n_em), np.nan)
    ti = {t: i for i, t in enumerate(thetas)}
    vi = {v: j for j, v in enumerate(vals)}
    for t, v, k, o in rows:
        occ[ti[t], vi[v], k - 1] = o
    if np.any(np.isnan(occ)):
        raise ValueError(f"{path}: incomplete map (missing cells)")
    return OccupationMap(
        theta_rad=np.array(thetas),
        axis_name=axis_col,
        axis_values_mev=np.array(vals),
        occupations=occ,
        metadata=meta,
    )


def write_spectrum_csv(pulse: SpectralPulse, path: str) -> None:
    """(omega_mev, re_amplitude, im_amplitude) rows for the masked spectrum."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# tool = multinarp {__version__}\n")
        fh.write(f"# carrier_mev = {pulse.grid.center_mev}\n")
        fh.write(f"# tau0_ps = {pulse.tau0_ps}\n")
        fh.write(f"# chirp_ps2 = {pulse.chirp_ps2}\n")
        fh.write(f"# theta_nominal_rad = {pulse.theta_nominal_rad}\n")
        fh.write("omega_mev,re_amplitude,im_amplitude\n")
        for e, a in zip(pulse.grid.energies_mev, pulse.amplitude):
            fh.write(f"{_fmt(e)},{_fmt(a.real)},{_fmt(a.imag)}\n")


def write_pulse_csv(pulse: TemporalPulse, path: str) -> None:
    """(t_ps, re_rabi_radps, im_rabi_radps) rows for the envelope."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# tool = multinarp {__version__}\n")
        fh.write(f"# alpha_ps2 = {pulse.alpha_ps2}\n")
        fh.write(f"# theta_nominal_rad = {pulse.theta_nominal_rad}\n")
        fh.write("t_ps,re_rabi_radps,im_rabi_radps\n")
        for t, a in zip(pulse.times_ps, pulse.envelope):
            fh.write(f"{_fmt(t)},{_fmt(a.real)},{_fmt(a.imag)}\n")


def write_trajectory_csv(traj: Trajectory, path: str, meta: dict | None = None) -> None:
    """(t_ps, rho11, re_rho01, im_rho01) rows, decimated trajectory."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# tool = multinarp {__version__}\n")
        for line in _metadata_lines(meta or {}):
            fh.write(line + "\n")
        fh.write(f"# final_occupation = {traj.final_occupation!r}\n")
        fh.write("t_ps,rho11,re_rho01,im_rho01\n")
        for t, occ, coh in zip(traj.times_ps, traj.occupation, traj.coherence):
            fh.write(f"{_fmt(t)},{_fmt(occ)},{_fmt(coh.real)},{_fmt(coh.imag)}\n")


# ---------------------------------------------------------------------------
# SVG (self-contained; no plotting dependency)


_CMAP_ANCHORS = [
    (0.0, (68, 1, 84)),
    (0.25, (59, 82, 139)),
    (0.5, (33, 145, 140)),
    (0.75, (94, 201, 98)),
    (1.0, (253, 231, 37)),
]


def _color(value: float) -> str:
    """Occupation in [0, 1] to a hex color (perceptual dark-to-bright)."""
    v = min(max(float(value), 0.0), 1.0)
    for (x0, c0), (x1, c1) in zip(_CMAP_ANCHORS, _CMAP_ANCHORS[1:]):
        if v <= x1:
            f = 0.0 if x1 == x0 else (v - x0) / (x1 - x0)
            rgb = tuple(round(a + f * (b - a)) for a, b in zip(c0, c1))
            return "#%02x%02x%02x" % rgb
    return "#fde725"


def _svg_header(width, height):
    return (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">\n'
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>\n'
    )


def _svg_text(x, y, s, size=12, anchor="middle", rotate=None):
    extra = f' transform="rotate(-90 {x} {y})"' if rotate else ""
    return (f'<text x="{x:.1f}" y="{y:.1f}" font-family="sans-serif" '
            f'font-size="{size}" text-anchor="{anchor}"{extra}>{s}</text>\n')


def render_heatmap(map_: OccupationMap, emitter: int, path: str) -> None:
    """Self-contained SVG heatmap of one emitter's occupation map.

    x axis: pulse area (rad), y axis: notch spacing or width (meV),
    color: occupation on a fixed 0 -> 1 scale with a colorbar.
    ``emitter`` is 1-based like the CSV column.
    """
    if not (1 <= emitter <= map_.n_emitters):
        raise ValueError(f"emitter index {emitter} out of range 1..{map_.n_emitters}")
    occ = map_.occupations[:, :, emitter - 1]
    n_t, n_v = occ.shape

    cell_w, cell_h = max(3, int(480 / n_t)), max(3, int(320 / n_v))
    plot_w, plot_h = cell_w * n_t, cell_h * n_v
    ml, mt, mr, mb = 70, 40, 70, 55
    width, height = ml + plot_w + mr, mt + plot_h + mb

    parts = [_svg_header(width, height)]
    # the emitter index lives in the file name, not the pixels, so that
    # symmetry-equivalent emitters render to identical files
    parts.append(_svg_text(ml + plot_w / 2, 22, "final exciton occupation",
                           size=14))
    parts.append('<g id="cells">\n')
    # occupations are quantized to 1/1000 before coloring
    for i in range(n_t):
        for j in range(n_v):
            v = round(occ[i, j] * 1000.0) / 1000.0
            x = ml + i * cell_w
            y = mt + (n_v - 1 - j) * cell_h
            parts.append(
                f'<rect x="{x}" y="{y}" width="{cell_w}" height="{cell_h}" '
                f'fill="{_color(v)}"/>\n')
    parts.append("</g>\n")
    # axes
    parts.append(f'<rect x="{ml}" y="{mt}" width="{plot_w}" height="{plot_h}" '
                 'fill="none" stroke="black"/>\n')
    t = map_.theta_rad
    for frac in (0.0, 0.5, 1.0):
        xv = t[0] + frac * (t[-1] - t[0])
        x = ml + frac * plot_w
        parts.append(_svg_text(x, mt + plot_h + 18, f"{xv / np.pi:.1f}π"))
    parts.append(_svg_text(ml + plot_w / 2, mt + plot_h + 40,
                           "pulse area (rad)", size=13))
    v = map_.axis_values_mev
    for frac in (0.0, 0.5, 1.0):
        yv = v[0] + frac * (v[-1] - v[0])
        y = mt + plot_h - frac * plot_h + 4
        parts.append(_svg_text(ml - 8, y, f"{yv:.2g}", anchor="end"))
    label = ("notch spacing (meV)" if map_.axis_name == "spacing_mev"
             else "notch width (meV)")
    parts.append(_svg_text(18, mt + plot_h / 2, label, size=13, rotate=True))
    # colorbar
    cb_x, cb_w = ml + plot_w + 18, 16
    parts.append('<g id="colorbar">\n')
    for k in range(64):
        vv = 1.0 - (k + 0.5) / 64
        y = mt + k * (plot_h / 64)
        parts.append(
            f'<rect x="{cb_x}" y="{y:.2f}" width="{cb_w}" '
            f'height="{plot_h / 64 + 0.5:.2f}" fill="{_color(vv)}"/>\n')
    parts.append("</g>\n")
    parts.append(f'<rect x="{cb_x}" y="{mt}" width="{cb_w}" height="{plot_h}" '
                 'fill="none" stroke="black"/>\n')
    parts.append(_svg_text(cb_x + cb_w + 6, mt + 10, "1", anchor="start"))
    parts.append(_svg_text(cb_x + cb_w + 6, mt + plot_h, "0", anchor="start"))
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))


_LINE_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"]


def render_linecut(map_: OccupationMap, axis_index: int, path: str,
                   second: OccupationMap | None = None) -> None:
    """Occupation vs pulse area at one axis value, one polyline per emitter.

    When ``second`` is given its curves are drawn dashed (used for the
    +/- chirp comparison).
    """
    n_v = map_.axis_values_mev.size
    if not (0 <= axis_index < n_v):
        raise ValueError(f"axis index {axis_index} out of range 0..{n_v - 1}")
    ml, mt, mr, mb = 70, 40, 30, 55
    plot_w, plot_h = 520, 300
    width, height = ml + plot_w + mr, mt + plot_h + mb
    t = map_.theta_rad
    x_of = lambda th: ml + (th - t[0]) / (t[-1] - t[0]) * plot_w
    y_of = lambda occ: mt + (1.0 - occ) * plot_h

    parts = [_svg_header(width, height)]
    val = map_.axis_values_mev[axis_index]
    unit = "meV"
    name = ("spacing" if map_.axis_name == "spacing_mev" else "width")
    parts.append(_svg_text(ml + plot_w / 2, 22,
                           f"occupation vs pulse area ({name} = {val:g} {unit})",
                           size=14))
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = mt + frac * plot_h
        parts.append(f'<line x1="{ml}" y1="{y:.1f}" x2="{ml + plot_w}" '
                     f'y2="{y:.1f}" stroke="#dddddd"/>\n')
        parts.append(_svg_text(ml - 8, y + 4, f"{1 - frac:.2f}", anchor="end"))
    sources = [(map_, "")] + ([(second, ' stroke-dasharray="6 4"')] if second else [])
    for src, dash in sources:
        for k in range(src.n_emitters):
            pts = " ".join(
                f"{x_of(th):.2f},{y_of(src.occupations[i, axis_index, k]):.2f}"
                for i, th in enumerate(t))
            color = _LINE_COLORS[k % len(_LINE_COLORS)]
            parts.append(f'<polyline points="{pts}" fill="none" '
                         f'stroke="{color}" stroke-width="1.5"{dash}/>\n')
    parts.append(f'<rect x="{ml}" y="{mt}" width="{plot_w}" height="{plot_h}" '
                 'fill="none" stroke="black"/>\n')
    for frac in (0.0, 0.5, 1.0):
        xv = t[0] + frac * (t[-1] - t[0])
        parts.append(_svg_text(ml + frac * plot_w, mt + plot_h + 18,
                               f"{xv / np.pi:.1f}π"))
    parts.append(_svg_text(ml + plot_w / 2, mt + plot_h + 40,
                           "pulse area (rad)", size=13))
    parts.append(_svg_text(18, mt + plot_h / 2, "final occupation",
                           size=13, rotate=True))
    parts.append("</svg>\n")
    with open(path, "w") as fh:
        fh.write("".join(parts))


# ---------------------------------------------------------------------------
# CLI


def _add_shape_args(sp):
    sp.add_argument("--tau0", type=float, default=0.120, help="TL intensity FWHM (ps)")
    sp.add_argument("--theta", type=float, default=np.pi,
                    help="nominal pulse area (rad)")
    sp.add_argument("--chirp", type=float, default=0.0,
                    help="quadratic spectral phase (ps^2)")
    sp.add_argument("--carrier", type=float, default=0.0,
                    help="carrier energy (meV); detunings are relative to it")
    sp.add_argument("--notch-center", type=float, action="append", default=[],
                    metavar="MEV", help="notch center (repeatable)")
    sp.add_argument("--notch-width", type=float, default=1.0,
                    help="notch width delta (meV)")
    sp.add_argument("--no-notch", action="store_true",
                    help="disable all notches")


def _shaped_from_args(args):
    grid = default_grid(args.tau0, center_mev=args.carrier)
    spec = make_gaussian_spectrum(args.tau0, args.carrier, args.theta, grid)
    if args.notch_center and not args.no_notch:
        spec = apply_notch_mask(
            spec, NotchSpec(tuple(sorted(args.notch_center)), args.notch_width))
    if args.chirp:
        spec = apply_phase_mask(spec, ChirpSpec(args.chirp))
    return spec


def _cmd_shape(args) -> int:
    spec = _shaped_from_args(args)
    pulse = synthesize(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    spath = os.path.join(args.out_dir, f"{args.prefix}_spectrum.csv")
    tpath = os.path.join(args.out_dir, f"{args.prefix}_envelope.csv")
    write_spectrum_csv(spec, spath)
    write_pulse_csv(pulse, tpath)
    print(f"wrote {spath} and {tpath}")
    return 0


def _cmd_simulate(args) -> int:
    spec = _shaped_from_args(args)
    pulse = synthesize(spec)
    emitter = EmitterParams(detuning_mev=args.detuning, dipole_scale=args.dipole)
    env = None
    if args.phonons:
        env = PhononEnvironment(
            temperature_K=args.temperature,
            coupling_ps2=args.phonon_coupling,
            cutoff_mev=args.phonon_cutoff,
        )
    traj = integrate(pulse, emitter, env=env)
    os.makedirs(args.out_dir, exist_ok=True)
    path = os.path.join(args.out_dir, f"{args.prefix}_trajectory.csv")
    meta = {
        "theta_rad": args.theta,
        "detuning_mev": args.detuning,
        "chirp_ps2": args.chirp,
        "tau0_ps": args.tau0,
        "phonons": bool(env),
        "refine": traj.refine,
    }
    write_trajectory_csv(traj, path, meta)
    print(f"final_occupation = {traj.final_occupation:.6f} ({path})")
    return 0


def _apply_resolution(spec, args):
    if args.theta_points:
        spec = replace(spec, theta_grid_rad=tuple(np.linspace(
            spec.theta_grid_rad[0], spec.theta_grid_rad[-1], args.theta_points)))
    if args.axis_points:
        axis = np.asarray(spec.axis_values)
        newaxis = tuple(np.linspace(axis[0], axis[-1], args.axis_points)) \
            if axis.size > 1 else tuple(axis)
        if spec.spacing_grid_mev is not None:
            spec = replace(spec, spacing_grid_mev=newaxis)
        else:
            spec = replace(spec, width_grid_mev=newaxis)
    return spec


def _progress_printer(enabled):
    if not enabled:
        return None
    state = {"last": -1}

    def progress(done, total):
        pct = int(100 * done / total)
        if pct != state["last"]:
            state["last"] = pct
            print(f"\r  {pct:3d}% ({done}/{total} cells)", end="", flush=True)
            if done == total:
                print()
    return progress


def _cmd_sweep(args) -> int:
    cfg = read_config(args.config)
    os.makedirs(cfg.output_dir, exist_ok=True)
    map_ = run_sweep(cfg.spec, progress=_progress_printer(not args.quiet),
                     workers=args.workers if args.workers else cfg.workers)
    path = os.path.join(cfg.output_dir, f"{cfg.label}_map.csv")
    write_map_csv(map_, path)
    written = [path]
    if cfg.emit_plots:
        for k in range(map_.n_emitters):
            p = os.path.join(cfg.output_dir, f"{cfg.label}_qd{k + 1}.svg")
            render_heatmap(map_, k + 1, p)
            written.append(p)
    print("wrote " + ", ".join(written))
    return 0


def _cmd_figure(args) -> int:
    name = args.preset
    spec = preset(name)
    spec = _apply_resolution(spec, args)
    os.makedirs(args.out_dir, exist_ok=True)
    progress = _progress_printer(not args.quiet)
    written = []

    map_ = run_sweep(spec, progress=progress, workers=args.workers)
    for k in range(map_.n_emitters):
        sub = OccupationMap(
            theta_rad=map_.theta_rad,
            axis_name=map_.axis_name,
            axis_values_mev=map_.axis_values_mev,
            occupations=map_.occupations[:, :, k:k + 1],
            metadata={**map_.metadata, "emitter_index": k + 1},
        )
        path = os.path.join(args.out_dir, f"{name}_qd{k + 1}.csv")
        # keep the canonical 4-column schema with the true emitter index
        with open(path, "w", newline="") as fh:
            for line in _metadata_lines(sub.metadata):
                fh.write(line + "\n")
            fh.write(f"theta_rad,{map_.axis_name},emitter_index,occupation\n")
            for i, theta in enumerate(map_.theta_rad):
                for j, val in enumerate(map_.axis_values_mev):
                    fh.write(f"{_fmt(theta)},{_fmt(val)},{k + 1},"
                             f"{_fmt(map_.occupations[i, j, k])}\n")
        written.append(path)

    svg_path = os.path.join(args.out_dir, f"{name}.svg")
    if name == "fig2e":
        map_neg = run_sweep(flip_chirp(spec), progress=progress,
                            workers=args.workers)
        neg_path = os.path.join(args.out_dir, f"{name}_negative_chirp_map.csv")
        write_map_csv(map_neg, neg_path)
        written.append(neg_path)
        render_linecut(map_, 0, svg_path, second=map_neg)
    elif map_.axis_values_mev.size == 1:
        render_linecut(map_, 0, svg_path)
    else:
        render_heatmap(map_, (map_.n_emitters + 1) // 2, svg_path)
        for k in range(map_.n_emitters):
            p = os.path.join(args.out_dir, f"{name}_qd{k + 1}.svg")
            render_heatmap(map_, k + 1, p)
            written.append(p)
    written.append(svg_path)
    print("wrote " + ", ".join(written))
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="multinarp",
        description=(
            "Shaped chirped-and-notched pulses driving N two-level "
            "emitters: spectra, trajectories, occupation maps."),
    )
    parser.add_argument("--version", action="version",
                        version=f"multinarp {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("shape", help="emit shaped spectrum + envelope CSVs")
    _add_shape_args(sp)
    sp.add_argument("--out-dir", default=".", help="output directory")
    sp.add_argument("--prefix", default="pulse", help="output file prefix")
    sp.set_defaults(func=_cmd_shape)

    sp = sub.add_parser("simulate", help="single-emitter trajectory CSV")
    _add_shape_args(sp)
    sp.add_argument("--detuning", type=float, default=0.0,
                    help="emitter detuning from the carrier (meV)")
    sp.add_argument("--dipole", type=float, default=1.0, help="dipole scale")
    sp.add_argument("--phonons", action="store_true",
                    help="enable LA-phonon dephasing")
    sp.add_argument("--temperature", type=float, default=DEFAULT_TEMPERATURE_K,
                    help="bath temperature (K)")
    sp.add_argument("--phonon-coupling", type=float, default=DEFAULT_COUPLING_PS2,
                    help="spectral density prefactor (ps^2)")
    sp.add_argument("--phonon-cutoff", type=float, default=DEFAULT_CUTOFF_MEV,
                    help="spectral density cutoff (meV)")
    sp.add_argument("--out-dir", default=".", help="output directory")
    sp.add_argument("--prefix", default="simulate", help="output file prefix")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("sweep", help="occupation map from a config file")
    sp.add_argument("config", help="INI run configuration")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker processes (default: config or "
                         "MULTINARP_WORKERS)")
    sp.add_argument("--quiet", action="store_true", help="suppress progress")
    sp.set_defaults(func=_cmd_sweep)

    sp = sub.add_parser("figure",
                        help="run a named preset and emit CSVs + SVG")
    sp.add_argument("preset", choices=list(preset_names()))
    sp.add_argument("--out-dir", default=".", help="output directory")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker processes")
    sp.add_argument("--theta-points", type=int, default=None,
                    help="override the pulse-area resolution")
    sp.add_argument("--axis-points", type=int, default=None,
                    help="override the spacing/width resolution")
    sp.add_argument("--quiet", action="store_true", help="suppress progress")
    sp.set_defaults(func=_cmd_figure)
    return parser


def cli_main(argv=None) -> int:
    """Entry point; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except (GridError, SynthesisError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except (SweepCellError, IntegrationError) as exc:
        print(f"error: numerical: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_main(sys.argv[1:]))
