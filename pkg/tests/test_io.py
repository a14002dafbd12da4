import numpy as np
import pytest

from geoflow import DiagnosticsRecord, Grid, LevelSet, sdf_ball
from geoflow.io import (TIMESERIES_HEADER, extract_contour2d, read_snapshot, read_timeseries,
                        write_contours, write_snapshot, write_timeseries)
from geoflow.shapes import levelset_ellipse


def test_empty_timeseries_is_header_only(tmp_path):
    path = write_timeseries([], tmp_path / "ts.csv")
    assert path.read_text() == ",".join(TIMESERIES_HEADER) + "\n"


def test_timeseries_round_trip(tmp_path):
    recs = [DiagnosticsRecord(i, 0.1 * i, 1 / 3, np.pi, np.e + i, 1e-17 * i, -2.5e-3, 0.0,
                              -0.2, 3.2) for i in range(4)]
    cols = read_timeseries(write_timeseries(recs, tmp_path / "ts.csv"))
    assert cols["iter"].tolist() == [0, 1, 2, 3]
    for name in TIMESERIES_HEADER:
        assert np.array_equal(cols[name], [getattr(r, "lam" if name == "lambda" else name)
                                           for r in recs])


def test_vtk_snapshot_layout(tmp_path):
    g = Grid.from_box((0.0, -1.0), (0.2, -0.8), 0.1)
    x, y = g.coords
    phi = np.broadcast_to(x + 10 * y, g.shape).copy()
    path = write_snapshot(phi, g, tmp_path / "s.vtk", H=2 * phi)
    text = path.read_text().splitlines()
    assert "DIMENSIONS 3 3 1" in text and "POINT_DATA 9" in text
    start = text.index("SCALARS phi double 1") + 2
    assert text.index("SCALARS H double 1") - start == 9
    dims, origin, spacing, arrays = read_snapshot(path)
    assert dims == (3, 3, 1)
    assert origin[:2] == pytest.approx((0.0, -1.0))
    assert spacing == pytest.approx((0.1, 0.1, 1.0))
    # x varies fastest in the file
    first = [float(v) for v in text[start:start + 2]]
    assert first[1] - first[0] == pytest.approx(0.1)
    assert np.allclose(arrays["phi"][..., 0], phi)
    assert np.allclose(arrays["H"][..., 0], 2 * phi)


def test_vtk_snapshot_3d_and_shape_check(tmp_path):
    g = Grid.from_box((-1, -1, -1), (1, 1, 1), 0.5)
    d = sdf_ball(g, 0.6)
    _, _, _, arrays = read_snapshot(write_snapshot(d, g, tmp_path / "s.vtk"))
    assert np.array_equal(arrays["phi"], d)
    with pytest.raises(ValueError):
        write_snapshot(d, g, tmp_path / "bad.vtk", H=d[:-1])


def test_circle_contour():
    g = Grid.from_box((-2, -2), (2, 2), 0.04)
    (line,) = extract_contour2d(LevelSet(g, sdf_ball(g, 1.0), is_distance=True))
    r = np.hypot(line[:, 0], line[:, 1])
    assert np.abs(r - 1.0).max() < 0.04 / 10
    assert np.array_equal(line[0], line[-1])


def test_contour_without_interface_is_empty(tmp_path):
    g = Grid.from_box((-1, -1), (1, 1), 0.1)
    ls = LevelSet(g, np.ones(g.shape))
    assert extract_contour2d(ls) == []
    assert write_contours([], tmp_path / "c.csv").read_text() == "contour,x,y\n"
    with pytest.raises(ValueError):
        extract_contour2d(LevelSet(Grid.from_box((-1,) * 3, (1,) * 3, 0.5),
                                   np.ones((5, 5, 5))))


def test_ellipse_contour_extremes(tmp_path):
    g = Grid.from_box((-3, -2), (3, 2), 0.04)
    (line,) = extract_contour2d(levelset_ellipse(g, (2.0, 1.0)))
    assert line[:, 0].max() == pytest.approx(2.0, abs=0.004)
    assert line[:, 0].min() == pytest.approx(-2.0, abs=0.004)
    assert line[:, 1].max() == pytest.approx(1.0, abs=0.004)
    rows = write_contours([line], tmp_path / "c.csv").read_text().splitlines()
    assert len(rows) == len(line) + 1
