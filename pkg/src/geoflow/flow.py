"""Willmore flow of level sets by diffusion, correction, rescaling and redistancing.

Each iteration diffuses ``d`` (and ``d**2``) for the pseudo-times ``sqrt(2) dt`` and
``dt/sqrt(2)``, combines the results into ``D = d - tau * W + O(dt^3)`` where ``W``
is the Willmore normal velocity and ``tau`` the flow step, optionally projects
``D`` back onto prescribed volume and area, and rebuilds a signed distance function.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .curvature import COEFFS, curvature_diffusion_order2, curvature_from_pair
from .errors import DegenerateCurvature, SingularSystem
from .grid import Grid, LevelSet, enclosed_volume, grad_norm, integrate, interface_area
from .heat import LinearSolveParams, Scheme, diffuse_pair
from .redistance import redistance, redistance_closest_point
from .rescale import apply_rescale, area_shift, volume_shift

log = logging.getLogger(__name__)


def flow_step_factor(dim, scheme):
    """Flow time advanced per iteration, in units of ``dt**2``."""
    scheme = Scheme.parse(scheme)
    base = 0.5 if dim == 2 else 1.0
    return base * scheme.second_order_factor


def combination_order2(g_alpha, g_beta):
    """``a2 G(alpha dt) + b2 G(beta dt)`` = ``d - w dt^2`` (doubled dt^2 term for Euler)."""
    return COEFFS.a2 * g_alpha + COEFFS.b2 * g_beta


def combination_order2_d2(d, grid, dt, scheme=Scheme.CN, params=None):
    """Order-2 combination of the diffusions of ``d**2``: ``d^2 - 2 dt^2 (c + d w)``."""
    return combination_order2(*diffuse_pair(d * d, grid, dt, scheme, params))


@dataclass
class StepResult:
    D: np.ndarray
    H: np.ndarray
    tau: float


def willmore_step(d, grid, dt, scheme=Scheme.CN, variant="d2", params=None):
    """Return the corrected field ``D`` whose zero level has moved by one Willmore step.

    ``H`` is the order-2 diffusion curvature of ``d`` computed from the same
    diffusions.  ``variant`` is ``"d2"`` (correction through diffusions of ``d**2``)
    or ``"direct"`` (explicit ``H**3`` correction, 2D only).
    """
    scheme = Scheme.parse(scheme)
    dim = grid.dim
    if dim not in (2, 3):
        raise ValueError("Willmore steps need a 2D or 3D grid")
    g_alpha, g_beta = diffuse_pair(d, grid, dt, scheme, params)
    H = curvature_from_pair(d, g_alpha, g_beta, grid, dt)
    comb = combination_order2(g_alpha, g_beta)
    tau = flow_step_factor(dim, scheme) * dt * dt
    if dim == 2 and variant == "direct":
        k = 0.5 if scheme is Scheme.EULER else 0.25
        D = comb + k * H ** 3 * dt * dt
    elif variant in ("d2", "direct"):
        comb_d2 = combination_order2_d2(d, grid, dt, scheme, params)
        s = 0.5 if dim == 2 else 1.0
        D = (s / 2) * H * d * d + comb * (1.0 - s * H * d) + comb_d2 * (s / 2) * H
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return StepResult(D, H, tau)


def willmore_step_2d(d, grid, dt, scheme=Scheme.CN, variant="d2", params=None):
    if grid.dim != 2:
        raise ValueError("expected a 2D grid")
    return willmore_step(d, grid, dt, scheme, variant, params).D


def willmore_step_3d(d, grid, dt, scheme=Scheme.EULER, params=None):
    if grid.dim != 3:
        raise ValueError("expected a 3D grid")
    return willmore_step(d, grid, dt, scheme, "d2", params).D


def willmore_energy(ls, H):
    """Integral of ``H**2`` over the interface, via the smoothed delta."""
    return integrate(np.asarray(H) ** 2 * ls.delta() * grad_norm(ls.phi, ls.grid), ls.grid)


def band_curvature_max(H, ls):
    band = np.abs(ls.phi) <= ls.eps
    if not band.any():
        return 0.0
    return float(np.max(np.abs((ls.grid.dim - 1) * H[band])))


def adaptive_dt(H_prev, ls, h=None):
    """``h / max|kappa|`` over the band ``|phi| <= eps``, floored at ``1e-3 h``, capped at extent/10."""
    h = h or min(ls.grid.h)
    cap = min(ls.grid.extent) / 10.0
    kmax = band_curvature_max(H_prev, ls)
    if kmax <= h / cap:
        return cap
    return float(np.clip(h / kmax, 1e-3 * h, cap))


@dataclass
class FlowConfig:
    """Run parameters for a (possibly constrained) Willmore flow."""

    dim: int = 2
    scheme: Scheme = None
    variant_2d: str = "d2"
    constrained: bool = False
    V0: float = None
    A0: float = None
    dt: float = None                 # fixed diffusion pseudo-time; None means adaptive
    dt_scale: float = 1.0            # multiplier on the adaptive rule h/|kappa|
    flow_ratio: float = 1.0          # flow step / (scheme factor * dt^2)
    max_time: float = np.inf
    max_iters: int = 1000
    output_every: int = 1
    rescale_weight: str = "delta_squared"
    combined_rescale: bool = False
    linear_solver: str = "dct"
    boundary: str = "extrapolate"    # wall treatment of the diffusions
    rel_tol: float = 1e-10
    stationary_tol: float = 1e-3     # in units of h
    stationary_count: int = 10       # 0 disables the stationarity stop
    eps_factor: float = 1.0
    redistance_method: str = "closest_point"
    measure_on_distance: bool = True   # redistance before measuring V and A

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError("dim must be 2 or 3")
        if self.scheme is None:
            self.scheme = Scheme.CN if self.dim == 2 else Scheme.EULER
        self.scheme = Scheme.parse(self.scheme)
        if self.variant_2d not in ("d2", "direct"):
            raise ValueError(f"unknown 2D variant {self.variant_2d!r}")
        if self.constrained:
            if not (self.V0 and self.V0 > 0 and self.A0 and self.A0 > 0):
                raise ValueError("constrained flow needs positive V0 and A0")
            from .shapes import reduced_volume
            # targets measured on a grid (smoothed delta) overshoot 1 by O((eps/R)^2)
            if reduced_volume(self.V0, self.A0, self.dim) > 1.0 + 1e-2:
                raise ValueError("targets violate the isoperimetric inequality")
        if self.dt is not None and self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.redistance_method not in ("fmm", "closest_point"):
            raise ValueError(f"unknown redistance method {self.redistance_method!r}")
        if self.rescale_weight not in ("delta", "delta_squared"):
            raise ValueError(f"unknown rescale weight {self.rescale_weight!r}")

    @property
    def params(self):
        return LinearSolveParams(rel_tol=self.rel_tol, method=self.linear_solver,
                                 boundary=self.boundary)


@dataclass
class DiagnosticsRecord:
    iter: int
    t: float
    dt: float
    volume: float
    area: float
    energy: float
    lam: float = 0.0
    mu: float = 0.0
    h_min: float = 0.0
    h_max: float = 0.0

    def as_row(self):
        return (self.iter, self.t, self.dt, self.volume, self.area, self.energy,
                self.lam, self.mu, self.h_min, self.h_max)


def _band_extremes(H, ls):
    band = np.abs(ls.phi) <= ls.eps
    if not band.any():
        return 0.0, 0.0
    return float(H[band].min()), float(H[band].max())


def constrained_step(d, grid, dt, cfg, eps=None):
    """One Willmore iteration followed by the volume/area projection and redistancing.

    Returns ``(d_next, info)`` where ``info`` holds ``tau``, ``lam``, ``mu`` and the
    curvature of ``d``.
    """
    params = cfg.params
    step = willmore_step(d, grid, dt, cfg.scheme, cfg.variant_2d, params)
    D = step.D
    tau = step.tau
    if cfg.flow_ratio != 1.0:
        D = d + cfg.flow_ratio * (D - d)
        tau *= cfg.flow_ratio
    lam = mu = 0.0
    if cfg.constrained:
        if cfg.measure_on_distance:
            # smoothed measures of a non-distance field are biased at O(eps^2 kappa);
            # they only read the band |D| < eps, so only the band is rebuilt
            if cfg.redistance_method == "closest_point":
                D = redistance_closest_point(D, grid, band=4 * (eps or min(grid.h)))
            else:
                D = redistance(D, grid, cfg.redistance_method)
        ls_D = LevelSet(grid, D, eps)
        H_D = curvature_diffusion_order2(D, grid, dt, cfg.scheme, params)
        kappa = (grid.dim - 1) * H_D
        if cfg.combined_rescale:
            from .rescale import rescale_combined
            try:
                lam, mu = rescale_combined(ls_D, cfg.V0, cfg.A0, kappa)
                D = D - lam - mu * kappa
            except SingularSystem as exc:  # circle/sphere: fall back to volume only
                warnings.warn(f"combined rescale skipped: {exc}")
                lam = volume_shift(ls_D, cfg.V0)
                D = D - lam
                mu = 0.0
        else:
            lam = volume_shift(ls_D, cfg.V0)
            ls_t = ls_D.with_phi(D - lam)
            kbar = 0.0
            try:
                mu, kbar = area_shift(ls_t, cfg.A0, kappa, cfg.rescale_weight)
            except DegenerateCurvature:
                log.debug("area step skipped: constant curvature")
                mu = 0.0
            D = apply_rescale(D, lam, mu, kappa, kbar,
                              localized=cfg.rescale_weight == "delta_squared", eps=eps)
    d_next = redistance(D, grid, cfg.redistance_method)
    return d_next, {"tau": tau, "lam": lam, "mu": mu, "H": step.H}


def _record(it, t, dt, ls, H, lam, mu):
    lo, hi = _band_extremes(H, ls)
    return DiagnosticsRecord(it, t, dt, enclosed_volume(ls), interface_area(ls),
                             willmore_energy(ls, H), lam, mu, lo, hi)


def run(ls, cfg, callback=None):
    """Iterate the flow from ``ls``; return ``(final LevelSet, list of DiagnosticsRecord)``.

    Stops at ``max_iters``, ``max_time`` or when the band moves less than
    ``stationary_tol * h`` for ``stationary_count`` consecutive iterations.
    ``callback(iteration, levelset, record)`` is invoked at the output cadence.
    """
    grid = ls.grid
    grid.require_isotropic()
    if grid.dim != cfg.dim:
        raise ValueError(f"config is {cfg.dim}D but grid is {grid.dim}D")
    h = grid.spacing
    eps = ls.eps
    d = ls.phi if ls.is_distance else redistance(ls.phi, grid, cfg.redistance_method)
    state = LevelSet(grid, d, eps, True)
    state.check_clearance()
    records = []
    if cfg.max_iters <= 0:
        return state, records

    params = cfg.params
    dt = cfg.dt if cfg.dt is not None else 0.7 * h
    H = curvature_diffusion_order2(d, grid, dt, cfg.scheme, params)
    if cfg.dt is None:
        dt = cfg.dt_scale * adaptive_dt(H, state, h)
        H = curvature_diffusion_order2(d, grid, dt, cfg.scheme, params)
    t = 0.0
    records.append(_record(0, t, dt, state, H, 0.0, 0.0))
    if callback:
        callback(0, state, records[-1])
    quiet = 0
    it = 0
    while it < cfg.max_iters and t < cfg.max_time:
        if cfg.dt is not None:
            dt = cfg.dt
        else:
            dt = cfg.dt_scale * adaptive_dt(H, state, h)
        remaining = cfg.max_time - t
        factor = flow_step_factor(grid.dim, cfg.scheme) * cfg.flow_ratio
        if np.isfinite(remaining) and factor * dt * dt > remaining:
            dt = np.sqrt(remaining / factor)
        d_next, info = constrained_step(d, grid, dt, cfg, eps)
        it += 1
        t += info["tau"]
        band = np.abs(d) <= 3 * eps
        change = float(np.max(np.abs(d_next - d)[band])) if band.any() else 0.0
        d = d_next
        state = LevelSet(grid, d, eps, True)
        H = curvature_diffusion_order2(d, grid, dt, cfg.scheme, params)
        if it % cfg.output_every == 0 or it == cfg.max_iters:
            rec = _record(it, t, dt, state, H, info["lam"], info["mu"])
            records.append(rec)
            log.info("iter %d t=%.6g dt=%.4g V=%.8g A=%.8g E=%.6g lam=%.3g mu=%.3g",
                     it, t, dt, rec.volume, rec.area, rec.energy, rec.lam, rec.mu)
            if callback:
                callback(it, state, rec)
        quiet = quiet + 1 if change < cfg.stationary_tol * h else 0
        if cfg.stationary_count > 0 and quiet >= cfg.stationary_count:
            log.info("stationary after %d iterations", it)
            break
    if records and records[-1].iter != it:
        records.append(_record(it, t, dt, state, H, info["lam"], info["mu"]))
    return state, records
