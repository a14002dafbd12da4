"""Mean-curvature estimators on signed distance functions.

Two families: direct differentiation of ``d`` (optionally smoothed), and
finite combinations of heat-diffused copies of ``d``, whose first-order term in
the pseudo-time is the total curvature ``kappa = (n-1) H``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import integrate, laplacian
from .heat import LinearSolveParams, Scheme, diffuse, diffuse_pair
from .errors import DegenerateInterface

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class OrderSelectionCoefficients:
    """Pseudo-time multipliers and weights that isolate one order of the heat expansion.

    ``a1*G(alpha dt) + b1*G(beta dt)`` keeps the first-order term and cancels the
    second; ``a2*G(alpha dt) + b2*G(beta dt)`` does the reverse.
    """

    alpha: float = SQRT2
    beta: float = SQRT2 / 2
    a1: float = -SQRT2 / 2
    b1: float = 2 * SQRT2
    a2: float = -1.0
    b2: float = 2.0

    def identities(self):
        """Residuals of the four order-selection conditions (all zero)."""
        al, be = self.alpha, self.beta
        return (self.a1 * al + self.b1 * be - 1.0,
                self.a1 * al ** 2 + self.b1 * be ** 2,
                self.a2 * al + self.b2 * be,
                self.a2 * al ** 2 + self.b2 * be ** 2 + 1.0)

    def check(self, tol=1e-14):
        res = self.identities()
        if max(abs(r) for r in res) > tol:
            raise AssertionError(f"order-selection identities violated: {res}")

    @property
    def order1_zeroth(self):
        """Coefficient of ``d`` left over in the order-1 combination (3 sqrt(2) / 2)."""
        return self.a1 + self.b1


COEFFS = OrderSelectionCoefficients()
COEFFS.check()


@dataclass(frozen=True)
class CurvatureMethod:
    """One of ``direct``, ``smoothed``, ``order1``, ``order2``.

    ``eta`` is the smoothing coefficient (default ``0.03 h``) and ``dt`` the diffusion
    pseudo-time; both are resolved against the grid when left unset.
    """

    tag: str = "order2"
    eta: float = None
    dt: float = None

    def __post_init__(self):
        if self.tag not in ("direct", "smoothed", "order1", "order2"):
            raise ValueError(f"unknown curvature method {self.tag!r}")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")


def curvature_direct(d, grid, eta=None, params=None):
    """``H = lap(d) / (n-1)``; with ``eta`` solve ``(I - eta lap) H = lap(d)/(n-1)``."""
    h = laplacian(d, grid) / (grid.dim - 1)
    if eta is None:
        return h
    # (I - eta L) H = rhs is one implicit Euler heat step of pseudo-time eta
    return diffuse(h, grid, eta, Scheme.EULER, params)


def curvature_diffusion_order1(d, grid, dt, scheme=Scheme.CN, params=None):
    g = diffuse(d, grid, dt, scheme, params)
    return (g - d) / ((grid.dim - 1) * dt)


def curvature_from_pair(d, g_alpha, g_beta, grid, dt):
    """Order-2 curvature from the diffusions at ``sqrt(2) dt`` and ``dt / sqrt(2)``."""
    c = COEFFS
    return (c.a1 * g_alpha + c.b1 * g_beta - c.order1_zeroth * d) / ((grid.dim - 1) * dt)


def curvature_diffusion_order2(d, grid, dt, scheme=Scheme.CN, params=None):
    g_alpha, g_beta = diffuse_pair(d, grid, dt, scheme, params)
    return curvature_from_pair(d, g_alpha, g_beta, grid, dt)


def mean_curvature(d, grid, method=None, scheme=Scheme.CN, params=None):
    """Dispatch on a :class:`CurvatureMethod`, filling grid-dependent defaults."""
    method = method or CurvatureMethod()
    h = min(grid.h)
    if method.tag == "direct":
        return curvature_direct(d, grid)
    if method.tag == "smoothed":
        return curvature_direct(d, grid, method.eta or 0.03 * h, params)
    dt = method.dt or 0.7 * h
    if method.tag == "order1":
        return curvature_diffusion_order1(d, grid, dt, scheme, params)
    return curvature_diffusion_order2(d, grid, dt, scheme, params)


def curvature_l2_error(H, H_ref, ls):
    """Interface-weighted mean of ``(H - H_ref)^2`` (a squared error, not its root)."""
    w = ls.delta()
    total = integrate(w, ls.grid)
    if total < 1e-12:
        raise DegenerateInterface("no interface inside the domain")
    return integrate((np.asarray(H) - H_ref) ** 2 * w, ls.grid) / total
