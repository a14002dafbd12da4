import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from geoflow import (COEFFS, CurvatureMethod, Grid, LevelSet, LinearSolveParams,
                     OrderSelectionCoefficients, curvature_diffusion_order1,
                     curvature_diffusion_order2, curvature_direct, curvature_l2_error,
                     mean_curvature, sdf_ball)
from geoflow.errors import DegenerateInterface


def test_order_selection_identities():
    al, be = COEFFS.alpha, COEFFS.beta
    assert COEFFS.a1 * al + COEFFS.b1 * be == pytest.approx(1.0, abs=1e-15)
    assert COEFFS.a1 * al ** 2 + COEFFS.b1 * be ** 2 == pytest.approx(0.0, abs=1e-15)
    assert COEFFS.a2 * al + COEFFS.b2 * be == pytest.approx(0.0, abs=1e-15)
    assert COEFFS.a2 * al ** 2 + COEFFS.b2 * be ** 2 == pytest.approx(-1.0, abs=1e-15)
    assert COEFFS.order1_zeroth == pytest.approx(3 * np.sqrt(2) / 2)


def test_broken_coefficients_are_detected():
    with pytest.raises(AssertionError):
        OrderSelectionCoefficients(a2=-1.1).check()


EXTRAP = LinearSolveParams(method="dct", boundary="extrapolate")


def level_curvature(grid):
    """Mean curvature 1/r of the level set of |x| through every node."""
    r = np.sqrt(sum(x * x for x in grid.coords))
    return np.broadcast_to(1.0 / np.maximum(r, 1e-12), grid.shape)


def rms(H, ref, d, grid):
    return np.sqrt(curvature_l2_error(H, ref, LevelSet(grid, d, is_distance=True)))


@pytest.fixture(scope="module")
def circle():
    g = Grid.from_box((-2, -2), (2, 2), 0.02)
    return g, sdf_ball(g, 1.0)


@pytest.mark.parametrize("tag,tol", [("direct", 1e-3), ("smoothed", 1e-3),
                                     ("order1", 0.02), ("order2", 2e-3)])
def test_circle_curvature(circle, tag, tol):
    g, d = circle
    H = mean_curvature(d, g, CurvatureMethod(tag), params=EXTRAP)
    assert rms(H, level_curvature(g), d, g) < tol


def test_order2_beats_order1(circle):
    g, d = circle
    dt = 0.02
    ref = level_curvature(g)
    e1 = rms(curvature_diffusion_order1(d, g, dt, params=EXTRAP), ref, d, g)
    e2 = rms(curvature_diffusion_order2(d, g, dt, params=EXTRAP), ref, d, g)
    assert e2 < 0.2 * e1


@pytest.mark.parametrize("scheme,tol", [("euler", 0.01), ("cn", 3e-3)])
def test_sphere_mean_curvature(scheme, tol):
    g = Grid.from_box((-2, -2, -2), (2, 2, 2), 0.08)
    d = sdf_ball(g, 1.0)
    H = curvature_diffusion_order2(d, g, 0.03, scheme, EXTRAP)
    assert rms(H, level_curvature(g), d, g) < tol


def test_direct_curvature_error_is_second_order(circle):
    g, d = circle
    h = g.spacing
    r = 1.0 / level_curvature(g)
    ring = np.abs(r - 1.0) < 0.5
    err = np.abs(curvature_direct(d, g) - 1.0 / r)
    assert np.all(err[ring] <= 3 * h * h / r[ring] ** 3)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.6, 1.4))
def test_curvature_scales_inversely_with_radius(R):
    g = Grid.from_box((-2, -2), (2, 2), 0.02)
    d = sdf_ball(g, R)
    H = curvature_diffusion_order2(d, g, 0.014 * R, params=EXTRAP)
    assert rms(H * R, level_curvature(g) * R, d, g) < 2e-3


def test_extrapolated_walls_mimic_unbounded_domain(circle):
    g, d = circle
    big = Grid.from_box((-4, -4), (4, 4), 0.02)
    ref = curvature_diffusion_order2(sdf_ball(big, 1.0), big, 0.02, params=EXTRAP)
    ref = ref[100:301, 100:301]
    ring = np.abs(d) < 0.1
    neu = curvature_diffusion_order2(d, g, 0.02, params=LinearSolveParams(method="dct"))
    ext = curvature_diffusion_order2(d, g, 0.02, params=EXTRAP)
    assert np.abs(ext - ref)[ring].max() < 1e-4
    assert np.abs(neu - ref)[ring].max() > 10 * np.abs(ext - ref)[ring].max()


def test_method_validation():
    with pytest.raises(ValueError):
        CurvatureMethod("spline")
    with pytest.raises(ValueError):
        CurvatureMethod(eta=-1.0)
    with pytest.raises(ValueError):
        CurvatureMethod(dt=0.0)


def test_l2_error_needs_interface():
    g = Grid.from_box((-1, -1), (1, 1), 0.1)
    with pytest.raises(DegenerateInterface):
        curvature_l2_error(g.zeros(), 1.0, LevelSet(g, np.ones(g.shape)))
