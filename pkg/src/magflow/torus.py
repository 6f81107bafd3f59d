"""The invariant torus of magnetic circles through a point and its projected density.

For subcritical energy 0 < E < E_c every magnetic trajectory through the
center i is a closed curve; collecting all launch directions theta and flow
times t gives a two-torus in the unit tangent bundle, parametrized by

    Psi(theta, t) = base point of the flow of the rotated shell tangent.

Its footpoint projection fills the closed disk of hyperbolic radius

    R_E = arccosh((B^2 + 2E) / (B^2 - 2E))

around the center.  Pushing the flat measure dtheta x dt forward through Psi
yields an absolutely continuous measure whose density against hyperbolic
area is

    alpha(y) = sum over preimages (theta_i, t_i) of 1 / (2E |b(t_i)|),

with b the Jacobi coefficient from the flow module; the Jacobian identity
|det dPsi| = 2E |b(t)| makes this exact.  alpha depends only on d(i, y),
blows up like sqrt(2/E)/d at the center and like C / sqrt(dist to boundary)
just inside the boundary circle, and integrates to 2 pi T_E (raw
normalization; dividing by 2 pi T_E gives a probability density).

Regular interior points have exactly two preimages (ingoing and outgoing
branch of the distance profile phi(t) = d(i, Psi(0, t))); boundary points
one; exterior points none.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .flow import MagneticConfig, Regime, flow_matrix, period, variation_coeffs
from .halfplane import hyp_dist, rotation_about_i, to_disk

__all__ = [
    "TorusPoint",
    "Flag",
    "DensitySample",
    "psi",
    "psi_many",
    "radius",
    "phi_profile",
    "t_of_distance",
    "alpha_radial",
    "jacobian",
    "preimages_cover",
    "density_cover",
    "density_mass",
]

# preimage pair closer than this in t is a tangency with the boundary
_MERGE_T = 1e-7
# points this close to the center have an ill-defined angular coordinate
_CENTER_TOL = 1e-9


class TorusPoint(NamedTuple):
    theta: float
    t: float


class Flag(str, Enum):
    NEAR_CENTER = "NearCenter"
    NEAR_BOUNDARY = "NearBoundary"
    OUTSIDE = "Outside"
    REGULAR = "Regular"


@dataclass(frozen=True)
class DensitySample:
    point: complex
    alpha_raw: float
    alpha_normalized: float
    preimages: tuple
    flag: Flag


def _require_torus(cfg: MagneticConfig) -> None:
    if cfg.E <= 0.0 or cfg.regime is not Regime.SUBCRITICAL:
        raise ValueError("torus undefined at this energy")


def psi(cfg: MagneticConfig, theta: float, t: float) -> complex:
    """Footpoint of the trajectory launched from the center at angle theta, time t."""
    _require_torus(cfg)
    m = rotation_about_i(theta) @ flow_matrix(cfg, t)
    return m.apply(1j)


def psi_many(cfg: MagneticConfig, theta, t):
    """Vectorized psi over broadcastable arrays of angles and times."""
    _require_torus(cfg)
    theta = np.asarray(theta, dtype=float)
    t = np.asarray(t, dtype=float)
    g = cfg.gamma
    half = 0.5 * g * t
    C = np.cos(half)
    S = np.sin(half) * (2.0 / g)
    lam, B = cfg.lam, cfg.B
    m11 = C + 0.5 * S * lam
    m12 = -0.5 * S * B
    m21 = 0.5 * S * B
    m22 = C - 0.5 * S * lam
    rc = np.cos(0.5 * theta)
    rs = np.sin(0.5 * theta)
    p11 = rc * m11 + rs * m21
    p12 = rc * m12 + rs * m22
    p21 = rc * m21 - rs * m11
    p22 = rc * m22 - rs * m12
    return (p11 * 1j + p12) / (p21 * 1j + p22)


def radius(cfg: MagneticConfig) -> float:
    """Hyperbolic radius R_E of the projected disk."""
    if cfg.regime is not Regime.SUBCRITICAL:
        raise ValueError("torus undefined at this energy")
    return math.acosh((cfg.B * cfg.B + 2.0 * cfg.E) / (cfg.B * cfg.B - 2.0 * cfg.E))


def phi_profile(cfg: MagneticConfig, t: float) -> float:
    """Distance profile phi(t) = d(i, psi(0, t)); maximal at t = T_E/2."""
    return hyp_dist(1j, psi(cfg, 0.0, t))


def t_of_distance(cfg: MagneticConfig, d):
    """First passage time t in [0, T_E/2] with phi(t) = d, in closed form.

    Inverts cosh phi(t) = 1 + (4E/gamma^2) sin^2(gamma t / 2); vectorized.
    Values of d beyond R_E are clipped to the boundary time T_E/2.
    """
    _require_torus(cfg)
    d = np.asarray(d, dtype=float)
    g = cfg.gamma
    s2 = g * g * (np.cosh(d) - 1.0) / (4.0 * cfg.E)
    s = np.sqrt(np.clip(s2, 0.0, 1.0))
    return (2.0 / g) * np.arcsin(s)


def alpha_radial(cfg: MagneticConfig, d):
    """Closed-form raw density as a function of distance to the center.

    Summing 1/(2E|b|) over the two preimage branches collapses to
    (gamma/E) / |sin(gamma t_1)| = (gamma/E) / (2 S sqrt(1 - S^2)) with
    S^2 = gamma^2 (cosh d - 1) / (4E).  Returns inf on the singular set
    (d = 0 and the boundary circle) and 0 outside; vectorized.
    """
    _require_torus(cfg)
    d = np.asarray(d, dtype=float)
    g = cfg.gamma
    E = cfg.E
    s2 = g * g * (np.cosh(d) - 1.0) / (4.0 * E)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = (g / E) / (2.0 * np.sqrt(s2) * np.sqrt(1.0 - s2))
    out = np.where(s2 > 1.0, 0.0, val)
    out = np.where(np.isnan(out), np.inf, out)
    if out.ndim == 0:
        return float(out)
    return out


def jacobian(cfg: MagneticConfig, theta: float, t: float) -> float:
    """|det dPsi| = 2E |b(t)|; independent of theta."""
    _require_torus(cfg)
    return 2.0 * cfg.E * abs(variation_coeffs(cfg, t).b)


def _theta_from_point(cfg: MagneticConfig, y: complex, t: float) -> float:
    # launch-angle rotation acts on the disk centered at i as w -> e^{i theta} w
    ref = to_disk(psi(cfg, 0.0, t))
    cur = to_disk(y)
    return (math.atan2(cur.imag, cur.real) - math.atan2(ref.imag, ref.real)) % (2.0 * math.pi)


def _bisect_profile(cfg: MagneticConfig, d: float, lo: float, hi: float, increasing: bool) -> float:
    # phi is strictly monotone on each half-period branch
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= 1e-12:
            break
        if (phi_profile(cfg, mid) < d) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def preimages_cover(cfg: MagneticConfig, y: complex) -> list:
    """All torus coordinates mapping to y: two inside the disk, one on the
    boundary circle, none outside."""
    _require_torus(cfg)
    d = hyp_dist(1j, y)
    if d < _CENTER_TOL:
        raise ValueError("degenerate center: full circle fiber")
    R = radius(cfg)
    T = period(cfg)
    # the boundary is a band of one part in 10^12 on both sides: points
    # constructed to lie on the circle land within float noise of it, and
    # their two bisection roots would straddle T/2 by more than the merge
    # window while reproducing y to machine accuracy either way
    if abs(d - R) <= 1e-12 * max(1.0, R):
        return [TorusPoint(_theta_from_point(cfg, y, 0.5 * T), 0.5 * T)]
    if d > R:
        return []
    t1 = _bisect_profile(cfg, d, 0.0, 0.5 * T, increasing=True)
    t2 = _bisect_profile(cfg, d, 0.5 * T, T, increasing=False)
    if abs(t2 - t1) < _MERGE_T:
        tm = 0.5 * (t1 + t2)
        return [TorusPoint(_theta_from_point(cfg, y, tm), tm)]
    return [
        TorusPoint(_theta_from_point(cfg, y, t1), t1),
        TorusPoint(_theta_from_point(cfg, y, t2), t2),
    ]


def _flag_for(d: float, R: float, center_band: float, boundary_band: float) -> Flag:
    if d < center_band * R:
        return Flag.NEAR_CENTER
    if abs(d - R) < boundary_band * R:
        return Flag.NEAR_BOUNDARY
    if d > R:
        return Flag.OUTSIDE
    return Flag.REGULAR


def density_cover(
    cfg: MagneticConfig,
    y: complex,
    center_band: float = 1e-3,
    boundary_band: float = 1e-3,
) -> DensitySample:
    """Pushforward density at y on the universal cover.

    alpha_raw sums 1/|det dPsi| over the preimages; alpha_normalized divides
    by the total mass 2 pi T_E.  Band widths are relative to R_E and only
    affect the flag.
    """
    pre = preimages_cover(cfg, y)
    total = 0.0
    for q in pre:
        j = jacobian(cfg, q.theta, q.t)
        total = math.inf if j == 0.0 else total + 1.0 / j
    d = hyp_dist(1j, y)
    R = radius(cfg)
    return DensitySample(
        point=y,
        alpha_raw=total,
        alpha_normalized=total / (2.0 * math.pi * period(cfg)),
        preimages=tuple(pre),
        flag=_flag_for(d, R, center_band, boundary_band),
    )


def density_mass(cfg: MagneticConfig, n_radial: int = 256) -> float:
    """Integral of alpha_raw over the projected disk against hyperbolic area.

    Geodesic polar quadrature with the singular bands of width 1e-4 around
    the center and the boundary excised; the excised contributions are added
    back from the integrable leading asymptotics.  Returns a value close to
    2 pi T_E; divide by that for the normalized (probability) mass.
    """
    if n_radial < 64:
        raise ValueError("quadrature resolution too coarse: need at least 64 radial nodes")
    _require_torus(cfg)
    R = radius(cfg)
    E = cfg.E
    delta = 1e-4

    def alpha_at(r: float) -> float:
        return density_cover(cfg, 1j * math.exp(r)).alpha_raw

    # excised bands, integrated from the leading singular behavior:
    # alpha ~ sqrt(2/E)/r near 0 (alpha sinh r -> sqrt(2/E));
    # alpha ~ c_bd / sqrt(R - r) inside the boundary
    c_bd = math.sqrt((cfg.B * cfg.B - 2.0 * E) / (2.0 * E * cfg.lam * cfg.B))
    mass = 2.0 * math.pi * math.sqrt(2.0 / E) * delta
    mass += 2.0 * math.pi * math.sinh(R) * c_bd * 2.0 * math.sqrt(delta)

    half = n_radial // 2
    nodes, weights = np.polynomial.legendre.leggauss(half)

    # [delta, R/2]: alpha * sinh extends smoothly to r = 0
    mid = 0.5 * R
    a, b = delta, mid
    r = 0.5 * (b - a) * nodes + 0.5 * (a + b)
    w = 0.5 * (b - a) * weights
    mass += sum(wi * alpha_at(ri) * 2.0 * math.pi * math.sinh(ri) for ri, wi in zip(r, w))

    # [R/2, R - delta] via u = sqrt(R - r): removes the 1/sqrt singularity
    ua, ub = math.sqrt(delta), math.sqrt(R - mid)
    u = 0.5 * (ub - ua) * nodes + 0.5 * (ua + ub)
    wu = 0.5 * (ub - ua) * weights
    mass += sum(
        wi * 2.0 * ui * alpha_at(R - ui * ui) * 2.0 * math.pi * math.sinh(R - ui * ui)
        for ui, wi in zip(u, wu)
    )
    return mass
