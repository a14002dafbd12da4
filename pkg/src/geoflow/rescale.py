"""First-order projection of a level set onto prescribed enclosed volume and interface area.

Lowering ``phi`` by ``dc`` changes the volume by ``int dc * zeta/eps`` and the area
by ``int kappa * dc * zeta/eps`` at first order.  A constant ``lam`` fixes the volume;
a zero-mean curvature profile ``mu (kappa - kbar)`` then fixes the area without
disturbing the volume.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCurvature, DegenerateInterface, SingularSystem
from .grid import (DEGENERATE_MEASURE, enclosed_volume, integrate, interface_area,
                   interface_weight, smoothed_delta)

# relative curvature variance below which the interface counts as a circle/sphere
TOL_DEGENERATE = 1e-2


@dataclass
class RescaleReport:
    lam: float
    mu: float
    kappa_bar: float
    volume_before: float
    volume_after: float
    area_before: float
    area_after: float
    mu_skipped: bool = False


def volume_shift(ls, V0):
    """Constant ``lam`` such that ``phi - lam`` encloses ``V0`` up to ``O(lam^2)``."""
    measure = integrate(ls.delta(), ls.grid)
    if measure < DEGENERATE_MEASURE:
        raise DegenerateInterface("no interface inside the domain")
    return (V0 - enclosed_volume(ls)) / measure


def area_shift(ls, A0, kappa, weight="delta_squared", tol_deg=TOL_DEGENERATE):
    """Return ``(mu, kbar)`` so that lowering by ``mu (kappa - kbar)`` restores area ``A0``.

    With ``weight="delta_squared"`` the profile is meant to be localised by
    ``zeta/eps`` (see :func:`apply_rescale`) and ``kbar`` is the ``zeta^2`` mean.
    Raises :class:`DegenerateCurvature` when the weighted curvature variance is below
    ``tol_deg * kbar^2``.
    """
    w = interface_weight(ls, weight)
    total = integrate(w, ls.grid)
    if total < DEGENERATE_MEASURE:
        raise DegenerateInterface("no interface inside the domain")
    kappa = np.asarray(kappa)
    kbar = integrate(w * kappa, ls.grid) / total
    k2bar = integrate(w * kappa * kappa, ls.grid) / total
    variance = k2bar - kbar * kbar
    if variance <= tol_deg * kbar * kbar:
        raise DegenerateCurvature(f"curvature variance {variance:.3g} too small "
                                  f"for mean {kbar:.3g}")
    mu = (A0 - interface_area(ls)) / (variance * total)
    return mu, kbar


def apply_rescale(phi, lam, mu, kappa, kbar, localized=True, eps=None):
    """``phi - lam - mu (kappa - kbar) * weight`` with weight ``zeta((phi-lam)/eps)/eps`` or 1."""
    out = np.asarray(phi, dtype=float) - lam
    if mu == 0.0:
        return out
    profile = np.asarray(kappa) - kbar
    if localized:
        if eps is None:
            raise ValueError("localized rescale needs eps")
        profile = profile * smoothed_delta(out / eps) / eps
    return out - mu * profile


def rescale(ls, V0, A0, kappa, weight="delta_squared", tol_deg=TOL_DEGENERATE):
    """Volume step then area step; returns the new field and a :class:`RescaleReport`."""
    v_before = enclosed_volume(ls)
    a_before = interface_area(ls)
    lam = volume_shift(ls, V0)
    shifted = ls.with_phi(ls.phi - lam, is_distance=False)
    skipped = False
    try:
        mu, kbar = area_shift(shifted, A0, kappa, weight, tol_deg)
    except DegenerateCurvature:
        mu, kbar, skipped = 0.0, 0.0, True
    phi = apply_rescale(ls.phi, lam, mu, kappa, kbar, weight == "delta_squared", ls.eps)
    after = ls.with_phi(phi, is_distance=False)
    return phi, RescaleReport(lam, mu, kbar, v_before, enclosed_volume(after),
                              a_before, interface_area(after), skipped)


def rescale_combined(ls, V0, A0, kappa, tol_deg=TOL_DEGENERATE):
    """Solve the 2x2 first-order system for ``dc = lam + mu kappa`` hitting both targets."""
    w = ls.delta()
    kappa = np.asarray(kappa)
    m0 = integrate(w, ls.grid)
    if m0 < DEGENERATE_MEASURE:
        raise DegenerateInterface("no interface inside the domain")
    m1 = integrate(w * kappa, ls.grid)
    m2 = integrate(w * kappa * kappa, ls.grid)
    det = m0 * m2 - m1 * m1
    if det <= tol_deg * m1 * m1:
        raise SingularSystem(f"determinant {det:.3g} below tolerance")
    rhs_v = V0 - enclosed_volume(ls)
    rhs_a = A0 - interface_area(ls)
    lam = (m2 * rhs_v - m1 * rhs_a) / det
    mu = (m0 * rhs_a - m1 * rhs_v) / det
    return lam, mu
