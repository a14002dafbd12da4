"""Uniform Cartesian grids, finite-difference operators and smoothed-interface quadrature.

Scalar fields are plain numpy arrays of shape ``grid.shape`` indexed ``[i, j(, k)]``
with axis 0 along x.  Boundary nodes use mirrored ghost values (homogeneous Neumann).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DegenerateInterface

DEGENERATE_MEASURE = 1e-12


@dataclass(frozen=True)
class Grid:
    n: tuple
    h: tuple
    origin: tuple

    def __post_init__(self):
        n = tuple(int(k) for k in np.atleast_1d(self.n))
        dim = len(n)
        h = tuple(float(v) for v in np.broadcast_to(np.asarray(self.h, float), (dim,)))
        origin = tuple(float(v) for v in np.broadcast_to(np.asarray(self.origin, float), (dim,)))
        if dim not in (1, 2, 3):
            raise ValueError(f"grid dimension must be 1, 2 or 3, got {dim}")
        if min(n) < 3:
            raise ValueError(f"need at least 3 nodes per axis, got {n}")
        if min(h) <= 0:
            raise ValueError(f"spacings must be positive, got {h}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "origin", origin)

    @classmethod
    def from_box(cls, lower, upper, h):
        """Grid covering the box ``[lower, upper]`` with spacing as close to ``h`` as fits."""
        lower = np.asarray(lower, float)
        upper = np.asarray(upper, float)
        n = np.maximum(np.rint((upper - lower) / h).astype(int) + 1, 3)
        return cls(tuple(n), tuple((upper - lower) / (n - 1)), tuple(lower))

    @property
    def dim(self):
        return len(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def extent(self):
        return tuple((k - 1) * s for k, s in zip(self.n, self.h))

    @property
    def upper(self):
        return tuple(o + e for o, e in zip(self.origin, self.extent))

    @property
    def spacing(self):
        """The common spacing of an isotropic grid."""
        self.require_isotropic()
        return self.h[0]

    def require_isotropic(self, rtol=1e-9):
        if max(self.h) - min(self.h) > rtol * max(self.h):
            raise ValueError(f"isotropic spacing required, got h={self.h}")

    def axes(self):
        return [o + s * np.arange(k) for o, s, k in zip(self.origin, self.h, self.n)]

    @cached_property
    def coords(self):
        """Node coordinates as a tuple of broadcast-ready arrays (one per axis)."""
        return tuple(np.meshgrid(*self.axes(), indexing="ij", sparse=True))

    @cached_property
    def weights(self):
        """Trapezoidal quadrature weights, including the cell volume."""
        w = np.ones(self.n)
        for ax, k in enumerate(self.n):
            wk = np.ones(k)
            wk[0] = wk[-1] = 0.5
            shape = [1] * self.dim
            shape[ax] = k
            w = w * wk.reshape(shape)
        return w * float(np.prod(self.h))

    def zeros(self):
        return np.zeros(self.n)

    def evaluate(self, func):
        """Evaluate ``func(x, y[, z])`` on all nodes."""
        return np.broadcast_to(func(*self.coords), self.n).astype(float)


@dataclass
class LevelSet:
    """A level-set function on a grid, negative inside, with interface half-thickness ``eps``."""

    grid: Grid
    phi: np.ndarray
    eps: float = None
    is_distance: bool = False
    _checked: bool = field(default=False, repr=False)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=float)
        if self.phi.shape != self.grid.shape:
            raise ValueError(f"field shape {self.phi.shape} does not match grid {self.grid.shape}")
        hmin = min(self.grid.h)
        if self.eps is None:
            self.eps = hmin
        if not hmin * (1 - 1e-9) <= self.eps <= 3 * max(self.grid.h) * (1 + 1e-9):
            raise ValueError(f"eps={self.eps} outside [h, 3h]")

    def with_phi(self, phi, is_distance=None):
        return LevelSet(self.grid, phi, self.eps,
                        self.is_distance if is_distance is None else is_distance)

    def delta(self):
        """Smoothed surface delta ``zeta(phi/eps)/eps`` on the nodes."""
        return smoothed_delta(self.phi / self.eps) / self.eps

    def check_clearance(self, factor=5.0):
        """Warn when the interface comes closer than ``factor*eps`` to the domain boundary."""
        margin = factor * self.eps
        faces = []
        for ax in range(self.grid.dim):
            for idx in (0, -1):
                faces.append(np.take(self.phi, idx, axis=ax))
        near = min(float(np.min(np.abs(f))) for f in faces)
        if near < margin and self.is_distance:
            warnings.warn(f"interface within {near:.3g} of the domain boundary "
                          f"(recommended clearance {margin:.3g})", stacklevel=2)
            return False
        return True


def laplacian(f, grid):
    """Second-order 5/7-point Laplacian with mirrored ghost nodes."""
    f = np.asarray(f, dtype=float)
    out = np.zeros_like(f)
    for ax, h in enumerate(grid.h):
        g = np.pad(f, [(1, 1) if a == ax else (0, 0) for a in range(f.ndim)], mode="reflect")
        lo = [slice(None)] * f.ndim
        hi = [slice(None)] * f.ndim
        lo[ax] = slice(0, -2)
        hi[ax] = slice(2, None)
        out += (g[tuple(lo)] + g[tuple(hi)] - 2.0 * f) / (h * h)
    return out


def gradient(f, grid):
    """Central differences inside, one-sided differences on boundary nodes."""
    g = np.gradient(np.asarray(f, dtype=float), *grid.h, edge_order=1)
    return list(g) if isinstance(g, (list, tuple)) else [g]


def grad_norm(f, grid):
    return np.sqrt(sum(g * g for g in gradient(f, grid)))


def smoothed_heaviside(r):
    r = np.asarray(r, dtype=float)
    rc = np.clip(r, -1.0, 1.0)
    return np.clip(0.5 * (rc + 1.0 + np.sin(np.pi * rc) / np.pi), 0.0, 1.0)


def smoothed_delta(r):
    r = np.asarray(r, dtype=float)
    return np.where(np.abs(r) < 1.0, 0.5 * (1.0 + np.cos(np.pi * np.clip(r, -1.0, 1.0))), 0.0)


def integrate(f, grid):
    return float(np.sum(grid.weights * f))


def enclosed_volume(ls):
    return integrate(smoothed_heaviside(-ls.phi / ls.eps), ls.grid)


def interface_area(ls):
    return integrate(ls.delta() * grad_norm(ls.phi, ls.grid), ls.grid)


def interface_weight(ls, weight="delta"):
    """Nodal weight ``zeta/eps`` or ``zeta^2/eps^2`` concentrated on the interface."""
    w = ls.delta()
    if weight == "delta":
        return w
    if weight == "delta_squared":
        return w * w
    raise ValueError(f"unknown weight {weight!r}")


def interface_mean(f, ls, weight="delta"):
    """Mean of ``f`` along the interface, weighted by the smoothed delta (or its square)."""
    w = interface_weight(ls, weight)
    total = integrate(w, ls.grid)
    if total < DEGENERATE_MEASURE:
        raise DegenerateInterface("no interface inside the domain")
    return integrate(np.asarray(f) * w, ls.grid) / total
