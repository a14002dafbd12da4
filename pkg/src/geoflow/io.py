"""Plot-ready outputs: diagnostics CSV, legacy VTK snapshots and 2D zero contours."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

TIMESERIES_HEADER = ("iter", "t", "dt", "volume", "area", "energy", "lambda", "mu",
                     "h_min", "h_max")


def _fmt(value):
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def write_timeseries(records, path):
    """One CSV row per :class:`DiagnosticsRecord`, floats at 17 significant digits."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TIMESERIES_HEADER)
        for rec in records:
            writer.writerow([_fmt(v) for v in rec.as_row()])
    return path


def read_timeseries(path):
    """Columns of a diagnostics CSV as a dict of float arrays."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in TIMESERIES_HEADER}


def write_snapshot(field, grid, path, H=None, title="geoflow snapshot"):
    """ASCII legacy VTK ``STRUCTURED_POINTS`` file with scalars ``phi`` (and ``H``).

    2D grids are written as a single z-slice.  VTK expects x varying fastest, so the
    (i, j, k)-indexed arrays are flattened in Fortran order.
    """
    path = Path(path)
    dims = list(grid.n) + [1] * (3 - grid.dim)
    origin = list(grid.origin) + [0.0] * (3 - grid.dim)
    spacing = list(grid.h) + [1.0] * (3 - grid.dim)
    arrays = [("phi", np.asarray(field, float))]
    if H is not None:
        arrays.append(("H", np.asarray(H, float)))
    npts = int(np.prod(dims))
    lines = ["# vtk DataFile Version 3.0", title, "ASCII", "DATASET STRUCTURED_POINTS",
             "DIMENSIONS " + " ".join(str(k) for k in dims),
             "ORIGIN " + " ".join(_fmt(v) for v in origin),
             "SPACING " + " ".join(_fmt(v) for v in spacing),
             f"POINT_DATA {npts}"]
    for name, arr in arrays:
        if arr.shape != tuple(grid.shape):
            raise ValueError(f"{name} has shape {arr.shape}, grid is {grid.shape}")
        lines.append(f"SCALARS {name} double 1")
        lines.append("LOOKUP_TABLE default")
        lines.extend(_fmt(v) for v in arr.ravel(order="F"))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_snapshot(path):
    """Parse a file written by :func:`write_snapshot`; returns (dims, origin, spacing, arrays)."""
    tokens = Path(path).read_text().split("\n")
    dims = origin = spacing = None
    arrays = {}
    i = 0
    while i < len(tokens):
        line = tokens[i].strip()
        if line.startswith("DIMENSIONS"):
            dims = tuple(int(v) for v in line.split()[1:])
        elif line.startswith("ORIGIN"):
            origin = tuple(float(v) for v in line.split()[1:])
        elif line.startswith("SPACING"):
            spacing = tuple(float(v) for v in line.split()[1:])
        elif line.startswith("SCALARS"):
            name = line.split()[1]
            n = int(np.prod(dims))
            vals = np.array([float(v) for v in tokens[i + 2:i + 2 + n]])
            arrays[name] = vals.reshape(dims, order="F")
            i += 1 + n
        i += 1
    return dims, origin, spacing, arrays


def extract_contour2d(ls):
    """Zero level of a 2D level set as a list of (m, 2) arrays of physical coordinates.

    Marching squares with linear interpolation along grid edges; closed curves
    repeat their first point at the end.
    """
    from skimage import measure

    grid = ls.grid
    if grid.dim != 2:
        raise ValueError("contours are extracted from 2D level sets only")
    phi = np.asarray(ls.phi, float)
    if not ((phi < 0).any() and (phi > 0).any()):
        return []
    lines = measure.find_contours(phi, 0.0)
    origin = np.asarray(grid.origin)
    h = np.asarray(grid.h)
    return [origin + line * h for line in lines]


def write_contours(contours, path):
    """CSV with columns ``contour,x,y``."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("contour", "x", "y"))
        for k, line in enumerate(contours):
            for x, y in line:
                writer.writerow((k, _fmt(x), _fmt(y)))
    return path
