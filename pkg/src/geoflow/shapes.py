"""Initial level sets and small geometric helpers (reduced volume, axis solving, torus radii)."""
from __future__ import annotations

import numpy as np
from scipy import integrate as quad_integrate

from .grid import LevelSet
from .redistance import redistance


def _centered(grid, center):
    center = np.zeros(grid.dim) if center is None else np.asarray(center, float)
    return [x - c for x, c in zip(grid.coords, center)]


def sdf_ball(grid, R, center=None):
    """``|x - c| - R`` on the grid nodes (circle in 2D, sphere in 3D)."""
    xs = _centered(grid, center)
    return np.broadcast_to(np.sqrt(sum(x * x for x in xs)) - R, grid.shape).copy()


sdf_circle = sdf_ball
sdf_sphere = sdf_ball


def sdf_plane(grid, normal, offset=0.0):
    normal = np.asarray(normal, float)
    normal = normal / np.linalg.norm(normal)
    return np.broadcast_to(sum(n * x for n, x in zip(normal, grid.coords)) - offset,
                           grid.shape).copy()


def sdf_torus(grid, a, b, axis=2, center=None):
    """Signed distance to the torus of major radius ``a`` and tube radius ``b``.

    ``axis`` is the index of the symmetry axis.
    """
    if grid.dim != 3:
        raise ValueError("torus needs a 3D grid")
    xs = _centered(grid, center)
    along = xs[axis]
    ring = np.sqrt(sum(x * x for i, x in enumerate(xs) if i != axis))
    return np.broadcast_to(np.sqrt((ring - a) ** 2 + along ** 2) - b, grid.shape).copy()


def levelset_ellipsoid(grid, semi_axes, center=None, eps=None, method="closest_point"):
    """Signed distance to an ellipse/ellipsoid, by redistancing its algebraic level function."""
    semi_axes = np.asarray(semi_axes, float)
    if semi_axes.shape != (grid.dim,) or np.any(semi_axes <= 0):
        raise ValueError(f"need {grid.dim} positive semi-axes, got {semi_axes}")
    xs = _centered(grid, center)
    q = sum((x / s) ** 2 for x, s in zip(xs, semi_axes)) - 1.0
    phi = np.broadcast_to(q * semi_axes.min() / 2.0, grid.shape)
    return LevelSet(grid, redistance(phi, grid, method), eps, is_distance=True)


levelset_ellipse = levelset_ellipsoid


def reduced_volume(V, A, dim):
    """Volume divided by that of the ball with the same interface measure."""
    if dim == 2:
        return 4.0 * np.pi * V / A ** 2
    if dim == 3:
        return 6.0 * np.sqrt(np.pi) * V / A ** 1.5
    raise ValueError("dim must be 2 or 3")


def ellipse_perimeter(a, b):
    val, _ = quad_integrate.quad(lambda t: np.hypot(a * np.sin(t), b * np.cos(t)),
                                 0.0, 0.5 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return 4.0 * val


def spheroid_area(a, b):
    """Area of the spheroid with semi-axis ``a`` along its symmetry axis and ``b`` across."""
    val, _ = quad_integrate.quad(
        lambda t: b * np.sin(t) * np.hypot(a * np.sin(t), b * np.cos(t)),
        0.0, 0.5 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return 4.0 * np.pi * val


def _axes(q, V, dim, kind):
    """Semi-axes with ratio ``q >= 1`` (long/short) and volume ``V``; first axis is the odd one."""
    if dim == 2:
        b = np.sqrt(V / (np.pi * q))
        return np.array([q * b, b])
    if kind == "prolate":
        b = (3.0 * V / (4.0 * np.pi * q)) ** (1.0 / 3.0)
        return np.array([q * b, b, b])
    if kind == "oblate":
        a = (3.0 * V / (4.0 * np.pi * q * q)) ** (1.0 / 3.0)
        return np.array([a, q * a, q * a])
    raise ValueError(f"unknown aspect kind {kind!r}")


def axes_reduced_volume(axes):
    axes = np.asarray(axes, float)
    if axes.size == 2:
        a, b = axes
        return reduced_volume(np.pi * a * b, ellipse_perimeter(a, b), 2)
    a, b, c = axes
    if not np.isclose(b, c):
        raise ValueError("only spheroids with axes[1] == axes[2] are supported")
    return reduced_volume(4.0 / 3.0 * np.pi * a * b * c, spheroid_area(a, b), 3)


def axes_for_reduced_volume(nu, V, dim, kind="prolate", tol=1e-10):
    """Ellipse/spheroid semi-axes of volume ``V`` and reduced volume ``nu`` (bisection on the aspect)."""
    if not 0.0 < nu <= 1.0:
        raise ValueError(f"reduced volume must lie in (0, 1], got {nu}")
    if nu == 1.0:
        return _axes(1.0, V, dim, kind)
    lo, hi = 1.0, 2.0
    while axes_reduced_volume(_axes(hi, V, dim, kind)) > nu:
        hi *= 2.0
        if hi > 1e8:
            raise ValueError(f"cannot reach reduced volume {nu}")
    while hi - lo > tol * hi:
        mid = 0.5 * (lo + hi)
        if axes_reduced_volume(_axes(mid, V, dim, kind)) > nu:
            lo = mid
        else:
            hi = mid
    return _axes(0.5 * (lo + hi), V, dim, kind)


def torus_radii_from_VA(V, A):
    """Radii ``(a, b)`` of the torus with volume ``2 pi^2 a b^2`` and area ``4 pi^2 a b``."""
    if V <= 0 or A <= 0:
        raise ValueError("volume and area must be positive")
    return A * A / (8.0 * np.pi ** 2 * V), 2.0 * V / A
