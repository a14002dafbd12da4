"""Command line driver: ``geoflow run --config FILE [--preset NAME] ...``.

Configuration files hold one ``key = value`` per line; ``#`` starts a comment.
Precedence is preset < file < command-line flags.  Unknown keys are errors.
"""
from __future__ import annotations

import argparse
import logging
import os
import re
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .flow import FlowConfig, run
from .grid import Grid, LevelSet, enclosed_volume, interface_area
from .io import extract_contour2d, write_contours, write_snapshot, write_timeseries
from .shapes import (axes_for_reduced_volume, levelset_ellipsoid, sdf_ball, sdf_torus)

log = logging.getLogger("geoflow")


def _floats(text):
    parts = [p for p in re.split(r"[,\s]+", text.strip()) if p]
    if not parts:
        raise ValueError("empty list")
    return tuple(float(p) for p in parts)


def _bool(text):
    key = text.strip().lower()
    if key in ("1", "true", "yes", "on"):
        return True
    if key in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_float(text):
    return None if text.strip().lower() in ("adaptive", "none", "") else float(text)


def _choice(*names):
    def parse(text):
        value = text.strip().lower()
        if value not in names:
            raise ValueError(f"expected one of {', '.join(names)}")
        return value
    return parse


SHAPES = ("circle", "sphere", "ellipse", "ellipsoid", "prolate", "oblate", "torus")

# key -> parser; the set of keys is closed
SCHEMA = {
    "shape": _choice(*SHAPES),
    "lower": _floats,
    "upper": _floats,
    "h": float,
    "center": _floats,
    "radius": float,
    "axes": _floats,
    "nu": float,
    "volume": float,
    "torus_a": float,
    "torus_b": float,
    "torus_axis": int,
    "scheme": _choice("euler", "cn"),
    "variant": _choice("d2", "direct"),
    "constrained": _bool,
    "dt": _optional_float,
    "dt_scale": float,
    "flow_ratio": float,
    "max_time": float,
    "max_iters": int,
    "output_every": int,
    "snapshot_every": int,
    "rescale_weight": _choice("delta", "delta_squared"),
    "combined_rescale": _bool,
    "linear_solver": _choice("dct", "cg"),
    "rel_tol": float,
    "boundary": _choice("neumann", "extrapolate"),
    "redistance": _choice("closest_point", "fmm"),
    "eps_factor": float,
    "stationary_tol": float,
    "stationary_count": int,
    "threads": int,
}

DEFAULTS = {
    "shape": "circle",
    "radius": 1.0,
    "dt_scale": 1.0,
    "flow_ratio": 1.0,
    "max_time": float("inf"),
    "max_iters": 1000,
    "output_every": 1,
    "snapshot_every": 0,
    "variant": "d2",
    "constrained": False,
    "dt": None,
    "eps_factor": 1.0,
    "threads": 1,
}


def _vesicle2d(nu):
    # Crank-Nicolson lets high-frequency noise in the curvature grow on these
    # shapes at dt_scale 1; Euler damps it
    return {"shape": "ellipse", "nu": nu, "volume": np.pi, "lower": (-4.0, -4.0),
            "upper": (4.0, 4.0), "h": 0.04, "constrained": True, "scheme": "euler",
            "eps_factor": 2.0, "max_iters": 800, "output_every": 10,
            "stationary_count": 0}


def _vesicle3d(kind, nu):
    box = {"prolate": ((-4.5, -2.0, -2.0), (4.5, 2.0, 2.0)),
           "oblate": ((-1.8, -3.2, -3.2), (1.8, 3.2, 3.2))}[kind]
    return {"shape": kind, "nu": nu, "volume": 4.0 * np.pi / 3.0, "lower": box[0],
            "upper": box[1], "h": 0.08, "constrained": True, "scheme": "euler",
            "max_iters": 2000, "output_every": 10}


PRESETS = {
    "circle2d": {"shape": "circle", "radius": 1.0, "lower": (-3.0, -3.0),
                 "upper": (3.0, 3.0), "h": 0.02, "scheme": "cn", "max_time": 3.0,
                 "max_iters": 100000, "output_every": 50, "stationary_count": 0},
    "clifford": {"shape": "torus", "torus_a": 2.0, "torus_b": 0.5, "torus_axis": 1,
                 "lower": (-3.0, -2.0, -3.0), "upper": (3.0, 2.0, 3.0), "h": 0.08,
                 "scheme": "euler", "max_iters": 3000, "output_every": 10,
                 "stationary_count": 0},
}
for _nu in (0.5, 0.6, 0.7, 0.8, 0.9):
    PRESETS[f"vesicle2d-nu{_nu}"] = _vesicle2d(_nu)
for _nu in (0.6, 0.65, 0.7, 0.8, 0.9):
    PRESETS[f"prolate3d-nu{_nu}"] = _vesicle3d("prolate", _nu)
    PRESETS[f"oblate3d-nu{_nu}"] = _vesicle3d("oblate", _nu)


def preset(name):
    """Settings of a named experiment."""
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; known: {', '.join(sorted(PRESETS))}") from None


def parse_text(text, source="<config>"):
    """Parse ``key = value`` lines into typed settings."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        out[key] = _convert(key, value, f"{source}:{lineno}")
    return out


def _convert(key, value, where):
    if key not in SCHEMA:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return SCHEMA[key](value)
    except ValueError as exc:
        raise ConfigError(f"{where}: bad value for {key!r}: {exc}") from None


def parse_config(path=None, overrides=None, preset_name=None):
    """Merge defaults, preset, file and overrides; return a :class:`RunSpec`."""
    settings = dict(DEFAULTS)
    if preset_name:
        settings.update(preset(preset_name))
    if path is not None:
        path = Path(path)
        settings.update(parse_text(path.read_text(), str(path)))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        settings[key] = _convert(key, value, "flag") if isinstance(value, str) else value
    return build(settings)


@dataclass
class RunSpec:
    grid: Grid
    levelset: LevelSet
    flow: FlowConfig
    settings: dict


def _initial_levelset(grid, s):
    shape = s["shape"]
    center = s.get("center")
    eps = s["eps_factor"] * grid.spacing
    if shape in ("circle", "sphere"):
        return LevelSet(grid, sdf_ball(grid, s["radius"], center), eps, is_distance=True)
    if shape == "torus":
        if grid.dim != 3:
            raise ConfigError("torus needs a 3D box")
        phi = sdf_torus(grid, s.get("torus_a", 2.0), s.get("torus_b", 0.5),
                        s.get("torus_axis", 2), center)
        return LevelSet(grid, phi, eps, is_distance=True)
    if "axes" in s:
        axes = np.asarray(s["axes"])
    elif "nu" in s:
        kind = "oblate" if shape == "oblate" else "prolate"
        volume = s.get("volume", np.pi if grid.dim == 2 else 4.0 * np.pi / 3.0)
        axes = axes_for_reduced_volume(s["nu"], volume, grid.dim, kind)
    else:
        raise ConfigError(f"shape {shape!r} needs 'axes' or 'nu'")
    return levelset_ellipsoid(grid, axes, center, eps)


def build(settings):
    """Turn merged settings into a grid, an initial level set and a flow configuration."""
    s = settings
    for key in ("lower", "upper", "h"):
        if key not in s:
            raise ConfigError(f"missing required key {key!r}")
    if len(s["lower"]) != len(s["upper"]):
        raise ConfigError("'lower' and 'upper' have different lengths")
    try:
        grid = Grid.from_box(s["lower"], s["upper"], s["h"])
        if grid.dim not in (2, 3):
            raise ConfigError("box must be 2D or 3D")
        ls = _initial_levelset(grid, s)
        V0 = A0 = None
        if s["constrained"]:
            V0, A0 = enclosed_volume(ls), interface_area(ls)
        optional = {k: s[k] for k in ("scheme", "rescale_weight", "combined_rescale",
                                       "linear_solver", "rel_tol", "boundary",
                                       "stationary_tol", "stationary_count") if k in s}
        if "redistance" in s:
            optional["redistance_method"] = s["redistance"]
        cfg = FlowConfig(dim=grid.dim, variant_2d=s["variant"], constrained=s["constrained"],
                         V0=V0, A0=A0, dt=s["dt"], dt_scale=s["dt_scale"],
                         flow_ratio=s["flow_ratio"], max_time=s["max_time"],
                         max_iters=s["max_iters"], output_every=s["output_every"],
                         eps_factor=s["eps_factor"], **optional)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return RunSpec(grid, ls, cfg, s)


def _set_threads(n):
    if n < 1:
        raise ConfigError("threads must be >= 1")
    try:
        import numba
        with warnings.catch_warnings():
            # an old TBB makes numba fall back to another layer, which is fine
            warnings.filterwarnings("ignore", message=".*TBB")
            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    except (ImportError, ValueError):
        pass


def execute(spec, out_dir):
    """Run the flow, writing ``timeseries.csv``, VTK snapshots and (2D) contours."""
    from scipy import fft

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    snap_every = spec.settings.get("snapshot_every", 0)
    grid = spec.grid
    (out_dir / "config.txt").write_text(
        "".join(f"{k} = {_render(v)}\n" for k, v in sorted(spec.settings.items())))

    def callback(it, state, rec):
        if snap_every and it % snap_every == 0:
            write_snapshot(state.phi, grid, out_dir / f"snapshot_{it:06d}.vtk")

    _set_threads(spec.settings.get("threads", 1))
    with fft.set_workers(spec.settings.get("threads", 1)):
        final, records = run(spec.levelset, spec.flow, callback)
    write_timeseries(records, out_dir / "timeseries.csv")
    write_snapshot(final.phi, grid, out_dir / "final.vtk")
    if grid.dim == 2:
        write_contours(extract_contour2d(final), out_dir / "contour.csv")
    return final, records


def _render(v):
    if isinstance(v, tuple):
        return ", ".join(repr(x) for x in v)
    return "adaptive" if v is None else str(v)


def make_parser():
    parser = argparse.ArgumentParser(prog="geoflow", description=__doc__.splitlines()[0])
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    parser.add_argument("-v", "--verbose", action="store_true", help="trace output")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a flow")
    p.add_argument("--config", type=Path, help="key = value configuration file")
    p.add_argument("--preset", help="named experiment: " + ", ".join(sorted(PRESETS)))
    p.add_argument("--out", type=Path, help="output directory (default $GEOFLOW_OUT or ./geoflow-out)")
    p.add_argument("--threads", type=int)
    p.add_argument("--scheme", choices=("euler", "cn"))
    p.add_argument("--h", type=float)
    p.add_argument("--max-iters", type=int)
    sub.add_parser("presets", help="list preset names")
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    level = logging.WARNING if args.quiet else logging.DEBUG if args.verbose else logging.INFO
    logging.basicConfig(level=level, format="%(message)s")
    logging.getLogger("numba").setLevel(logging.WARNING)
    if args.command == "presets":
        print("\n".join(sorted(PRESETS)))
        return 0
    if args.config is None and args.preset is None:
        print("geoflow: error: run needs --config or --preset", file=sys.stderr)
        return 2
    overrides = {"threads": args.threads, "scheme": args.scheme, "h": args.h,
                 "max_iters": args.max_iters}
    try:
        spec = parse_config(args.config, overrides, args.preset)
        out = args.out or Path(os.environ.get("GEOFLOW_OUT", "geoflow-out"))
        execute(spec, out)
    except (ConfigError, OSError) as exc:
        print(f"geoflow: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
