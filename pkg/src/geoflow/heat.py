"""One implicit step of the heat equation on a Neumann grid.

The mirrored-ghost Laplacian is self-adjoint for the trapezoidal inner product
``<u, v> = sum(w * u * v)``, so conjugate gradients run in that inner product.
A type-I DCT diagonalises the same discrete operator and gives an exact direct solve.

With ``boundary="extrapolate"`` the wall flux is taken from the data instead of set
to zero: the ghost value is the quadratic extrapolation of ``f0``, which adds a fixed
source ``c`` on boundary nodes.  A distance function is then diffused as if the
domain went on, with no kink at the walls.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy import fft

from .errors import SolverDiverged
from .grid import laplacian

SQRT2 = np.sqrt(2.0)


class Scheme(enum.Enum):
    EULER = "euler"
    CN = "cn"

    @property
    def second_order_factor(self):
        """Factor multiplying the dt^2 term of the one-step expansion."""
        return 2 if self is Scheme.EULER else 1

    @property
    def theta(self):
        return 1.0 if self is Scheme.EULER else 0.5

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        aliases = {"euler": cls.EULER, "impliciteuler": cls.EULER, "ie": cls.EULER,
                   "cn": cls.CN, "cranknicolson": cls.CN}
        if key not in aliases:
            raise ValueError(f"unknown scheme {value!r}")
        return aliases[key]


@dataclass(frozen=True)
class LinearSolveParams:
    rel_tol: float = 1e-10
    max_iter: int = None
    method: str = "cg"
    boundary: str = "neumann"

    def __post_init__(self):
        if self.boundary not in ("neumann", "extrapolate"):
            raise ValueError(f"unknown boundary treatment {self.boundary!r}")
        if not 0 < self.rel_tol <= 1e-4:
            raise ValueError(f"rel_tol must lie in (0, 1e-4], got {self.rel_tol}")
        if self.method not in ("cg", "dct"):
            raise ValueError(f"unknown linear solver {self.method!r}")


def _cg(apply, b, x0, weights, rel_tol, max_iter):
    """Conjugate gradients for an operator self-adjoint in the weighted inner product."""
    def dot(u, v):
        return float(np.sum(weights * u * v))

    x = x0.copy()
    r = b - apply(x)
    bnorm = np.sqrt(dot(b, b))
    if bnorm == 0.0:
        return np.zeros_like(b)
    target = rel_tol * bnorm
    rr = dot(r, r)
    if np.sqrt(rr) <= target:
        return x
    p = r.copy()
    for _ in range(max_iter):
        ap = apply(p)
        alpha = rr / dot(p, ap)
        x += alpha * p
        r -= alpha * ap
        rr_new = dot(r, r)
        if np.sqrt(rr_new) <= target:
            return x
        p *= rr_new / rr
        p += r
        rr = rr_new
    raise SolverDiverged(f"CG did not reach rel_tol={rel_tol:g} in {max_iter} iterations")


def _laplacian_symbol(grid):
    """Eigenvalues of the mirrored-ghost Laplacian in the DCT-I basis."""
    lam = np.zeros(grid.shape)
    for ax, (k, h) in enumerate(zip(grid.n, grid.h)):
        lk = -(2.0 - 2.0 * np.cos(np.pi * np.arange(k) / (k - 1))) / (h * h)
        shape = [1] * grid.dim
        shape[ax] = k
        lam = lam + lk.reshape(shape)
    return lam


def boundary_source(f, grid):
    """Source ``c`` with ``L f + c`` the Laplacian under quadratic ghost extrapolation."""
    c = np.zeros_like(f)
    for ax, h in enumerate(grid.h):
        for b, i1, i2 in ((0, 1, 2), (-1, -2, -3)):
            def take(i):
                return np.take(f, [i], axis=ax)
            idx = [slice(None)] * f.ndim
            idx[ax] = slice(b, b + 1) if b == 0 else slice(-1, None)
            c[tuple(idx)] += (3.0 * take(b) - 4.0 * take(i1) + take(i2)) / (h * h)
    return c


def _dct_step(f0, grid, dt, theta, source=None):
    lam = _laplacian_symbol(grid)
    denom = 1.0 - theta * dt * lam
    spec = fft.dctn(f0, type=1) * ((1.0 + (1.0 - theta) * dt * lam) / denom)
    if source is not None:
        spec += dt * fft.dctn(source, type=1) / denom
    return fft.idctn(spec, type=1)


def diffuse(f0, grid, dt, scheme=Scheme.CN, params=None):
    """Advance ``f0`` by one implicit heat step of pseudo-time ``dt``.

    Euler solves ``(I - dt L) u = f0``; Crank-Nicolson solves
    ``(I - dt/2 L) u = (I + dt/2 L) f0``, with ``L`` the Neumann grid Laplacian.
    With extrapolated boundaries both right-hand sides gain ``dt * c``.
    """
    if not dt > 0:
        raise ValueError(f"diffusion time must be positive, got {dt}")
    scheme = Scheme.parse(scheme)
    params = params or LinearSolveParams()
    f0 = np.asarray(f0, dtype=float)
    theta = scheme.theta
    source = boundary_source(f0, grid) if params.boundary == "extrapolate" else None
    if params.method == "dct":
        return _dct_step(f0, grid, dt, theta, source)

    if theta == 1.0:
        rhs = f0
    else:
        rhs = f0 + (1.0 - theta) * dt * laplacian(f0, grid)
    if source is not None:
        rhs = rhs + dt * source

    def apply(u):
        return u - theta * dt * laplacian(u, grid)

    max_iter = params.max_iter or 10 * max(grid.n)
    return _cg(apply, rhs, f0, grid.weights, params.rel_tol, max_iter)


def diffuse_pair(f0, grid, dt, scheme=Scheme.CN, params=None):
    """Return the one-step diffusions of ``f0`` for pseudo-times ``sqrt(2) dt`` and ``dt/sqrt(2)``."""
    if not dt > 0:
        raise ValueError(f"diffusion time must be positive, got {dt}")
    return (diffuse(f0, grid, SQRT2 * dt, scheme, params),
            diffuse(f0, grid, dt / SQRT2, scheme, params))
