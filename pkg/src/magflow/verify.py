"""Acceptance checks: every headline property of the library, as data.

Each check_* function runs one criterion end to end with fixed seeds and
returns a plain dict (name, passed, measured, tolerance, detail) so the
pytest suite and the command-line `verify` subcommand share one
implementation.  run_all executes the full battery in order.

The flow-oracle check accepts a j_sign argument: flipping the orientation
of the magnetic term in the numerical integrator must make that check fail,
which demonstrates the closed-form/integrator pair actually constrains the
sign convention (mutation sanity hook, reachable from the CLI).
"""

from __future__ import annotations

import math

import numpy as np

from .flow import (
    MagneticConfig,
    Regime,
    flow_exact,
    flow_numeric,
    lyapunov_exponent,
    period,
)
from .halfplane import Tangent, from_disk, hyp_dist, hyp_dist_vec, hyp_norm, to_disk
from .mc import compare_to_closed_form, sample_pushforward
from .spectrum import critical_gap, ladder_arrays, select_level
from .surface import (
    area_average,
    birkhoff_average,
    bolza_group,
    density_surface,
    in_domain_mask,
    octagon_area,
    reduce_point,
    relation_residual,
    translates_meeting_disk,
    word_element,
)
from .torus import density_cover, density_mass, preimages_cover, psi, psi_many, radius

__all__ = ["run_all", "CHECKS"]

_STD = MagneticConfig(1.0, 0.25)


def _random_subcritical(rng) -> MagneticConfig:
    B = rng.uniform(0.5, 2.5)
    return MagneticConfig(B, rng.uniform(0.05, 0.95) * 0.5 * B * B)


def _random_shell_tangent(rng, cfg: MagneticConfig) -> Tangent:
    z = complex(rng.uniform(-1.0, 1.0), math.exp(rng.uniform(-1.0, 1.0)))
    ang = rng.uniform(0.0, 2.0 * math.pi)
    return Tangent(z, cfg.lam * z.imag * complex(math.cos(ang), math.sin(ang)))


def _result(name, passed, measured, tolerance, detail=""):
    return {
        "name": name,
        "passed": bool(passed),
        "measured": measured,
        "tolerance": tolerance,
        "detail": detail,
    }


def check_periodicity(seed: int = 1001) -> dict:
    """All subcritical trajectories close after T_E = 2 pi (B^2-2E)^{-1/2}."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(50):
        cfg = _random_subcritical(rng)
        p = _random_shell_tangent(rng, cfg)
        q = flow_exact(cfg, p, period(cfg))
        res = hyp_dist(p.z, q.z) + abs(q.v - p.v) / p.z.imag
        worst = max(worst, res)
    return _result("periodicity", worst < 1e-9, worst, 1e-9,
                   "max return residual over 50 random subcritical pairs")


def check_footpoint_radius(seed: int = 1002) -> dict:
    """Swept radius max_t d(i, Psi(0, t)) equals arccosh((B^2+2E)/(B^2-2E))."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        cfg = _random_subcritical(rng)
        ts = np.linspace(0.0, period(cfg), 1001)  # contains T_E/2 exactly
        prof = hyp_dist_vec(psi_many(cfg, 0.0, ts), 1j)
        worst = max(worst, abs(float(prof.max()) - radius(cfg)))
    return _result("footpoint-radius", worst < 1e-8, worst, 1e-8,
                   "max |swept radius - closed form| over 20 random pairs")


def check_profile_derivatives(seed: int = 1003) -> dict:
    """phi'(T_E/2) = 0 and phi''(T_E/2) = (sqrt(2E)/2B)(2E - B^2)."""
    rng = np.random.default_rng(seed)
    configs = [_STD] + [_random_subcritical(rng) for _ in range(4)]
    worst1 = worst2 = 0.0
    for cfg in configs:
        tm = 0.5 * period(cfg)

        def phi(t):
            return hyp_dist(1j, psi(cfg, 0.0, t))

        h1 = 1e-5
        d1 = (phi(tm + h1) - phi(tm - h1)) / (2.0 * h1)
        h2 = 1e-4
        d2 = (phi(tm + h2) - 2.0 * phi(tm) + phi(tm - h2)) / (h2 * h2)
        target = (cfg.lam / (2.0 * cfg.B)) * (2.0 * cfg.E - cfg.B * cfg.B)
        worst1 = max(worst1, abs(d1))
        worst2 = max(worst2, abs(d2 - target))
    return _result("profile-derivatives", worst1 < 1e-6 and worst2 < 1e-4,
                   {"phi1": worst1, "phi2_err": worst2},
                   {"phi1": 1e-6, "phi2_err": 1e-4},
                   "finite differences at the profile apex; includes B=1, E=0.25")


def check_jacobian_identity(seed: int = 1004) -> dict:
    """|det dPsi| from finite differences matches 2E|b(t)|."""
    from .torus import jacobian

    rng = np.random.default_rng(seed)
    worst = 0.0
    for cfg in (_STD, _random_subcritical(rng), _random_subcritical(rng)):
        T = period(cfg)
        for _ in range(34):
            th = rng.uniform(0.0, 2.0 * math.pi)
            t = rng.uniform(0.07, 0.93) * T
            if abs(t - 0.5 * T) < 0.05 * T:
                t = 0.4 * T
            y0 = psi(cfg, th, t)

            def disk(w):
                return (w - y0) / (w - y0.conjugate())

            h = 1e-6
            c_th = (disk(psi(cfg, th + h, t)) - disk(psi(cfg, th - h, t))) / (2.0 * h)
            c_t = (disk(psi(cfg, th, t + h)) - disk(psi(cfg, th, t - h))) / (2.0 * h)
            # metric at the disk center is 2|du|: normal coordinates scale by 2
            num = 4.0 * abs(c_th.real * c_t.imag - c_th.imag * c_t.real)
            exact = jacobian(cfg, th, t)
            worst = max(worst, abs(num / exact - 1.0))
    return _result("jacobian-identity", worst < 1e-4, worst, 1e-4,
                   "max relative error over ~100 random regular torus points")


def check_density_mass() -> dict:
    """Raw density integrates to 2 pi T_E over the disk (normalized: to 1)."""
    mass = density_mass(_STD, 256)
    target = 2.0 * math.pi * period(_STD)
    rel = abs(mass / target - 1.0)
    return _result("density-mass", rel < 0.01,
                   {"mass": mass, "normalized": mass / target}, 0.01,
                   f"target 2*pi*T_E = {target:.6f}")


def check_singularity_asymptotics() -> dict:
    """1/d blowup at the center, 1/sqrt blowup inside the boundary circle."""
    cfg = _STD
    R = radius(cfg)
    c_center = math.sqrt(2.0 / cfg.E)
    c_bd = (1.0 / cfg.E) * math.sqrt(cfg.lam * (cfg.B ** 2 - 2.0 * cfg.E) / (4.0 * cfg.B))

    d0 = 1e-6
    a0 = density_cover(cfg, 1j * math.exp(d0)).alpha_raw
    center_err = abs(a0 * d0 / c_center - 1.0)

    tau = 1e-6
    a1 = density_cover(cfg, 1j * math.exp(R - tau)).alpha_raw
    bd_err = abs(a1 * math.sqrt(tau) / c_bd - 1.0)

    ds = np.logspace(-5, -2, 20)
    al = np.array([density_cover(cfg, 1j * math.exp(d)).alpha_raw for d in ds])
    center_slope = float(np.polyfit(np.log(ds), np.log(al), 1)[0])

    taus = np.logspace(-6, -3, 20)
    al2 = np.array([density_cover(cfg, 1j * math.exp(R - s)).alpha_raw for s in taus])
    boundary_slope = float(np.polyfit(np.log(taus), np.log(al2), 1)[0])

    passed = (
        center_err < 0.01
        and bd_err < 0.02
        and abs(center_slope + 1.0) < 0.05
        and abs(boundary_slope + 0.5) < 0.05
    )
    return _result(
        "singularity-asymptotics", passed,
        {"center_const_rel_err": center_err, "boundary_const_rel_err": bd_err,
         "center_slope": center_slope, "boundary_slope": boundary_slope},
        {"center_const_rel_err": 0.01, "boundary_const_rel_err": 0.02,
         "center_slope": "-1 +- 0.05", "boundary_slope": "-0.5 +- 0.05"},
        f"constants {c_center:.6f} (center), {c_bd:.6f} (boundary)")


def check_mc_oracle(seed: int = 777, n: int = 10_000_000) -> dict:
    """10^7 pushforward samples agree with exact ring averages off the bands."""
    hist = sample_pushforward(_STD, n, seed)
    report = compare_to_closed_form(hist, _STD)
    err = report["max_rel_err_body"]
    return _result("mc-oracle", err < 0.05,
                   {"max_rel_err_body": err,
                    "center_slope": report["center_slope"],
                    "boundary_slope": report["boundary_slope"],
                    "chi2": report["chi2"], "chi2_dof": report["chi2_dof"]},
                   0.05, f"rings with d in [0.1, 0.9] R_E, n = {n}, seed = {seed}")


def check_preimage_counts(seed: int = 1008) -> dict:
    """2 preimages strictly inside, 1 on the boundary, 0 outside; and the
    surface count is bounded by twice the translate count."""
    rng = np.random.default_rng(seed)
    cfg = _STD
    R = radius(cfg)
    T = period(cfg)
    ok = True
    for _ in range(800):
        d = rng.uniform(0.01, 0.99) * R
        ang = rng.uniform(0.0, 2.0 * math.pi)
        y = from_disk(math.tanh(0.5 * d) * complex(math.cos(ang), math.sin(ang)))
        ok = ok and len(preimages_cover(cfg, y)) == 2
    for _ in range(100):
        y = psi(cfg, rng.uniform(0.0, 2.0 * math.pi), 0.5 * T)
        ok = ok and len(preimages_cover(cfg, y)) == 1
    for _ in range(100):
        ang = rng.uniform(0.0, 2.0 * math.pi)
        y = from_disk(math.tanh(0.5 * (R + rng.uniform(0.05, 1.0)))
                      * complex(math.cos(ang), math.sin(ang)))
        ok = ok and len(preimages_cover(cfg, y)) == 0

    group = bolza_group()
    translates = translates_meeting_disk(group, R)
    re = math.tanh(0.5 * group.circumradius)
    xs = np.linspace(-re, re, 100)
    u = (xs[None, :] + 1j * xs[:, None]).ravel()
    u = u[np.abs(u) < re]
    z = from_disk(u)
    z = z[in_domain_mask(group, z)]
    counts = np.zeros(z.shape, dtype=int)
    for g in translates:
        counts += 2 * (hyp_dist_vec(g.apply(z), 1j) < R)
    max_count = int(counts.max())
    bound = 2 * len(translates)
    ok = ok and max_count <= bound

    # the vectorized count must agree with the honest per-point machinery
    sub = rng.choice(len(z), size=25, replace=False)
    for j in sub:
        samp = density_surface(group, cfg, complex(z[j]))
        ok = ok and len(samp.preimages) == int(counts[j])
    return _result("preimage-counts", ok,
                   {"surface_max": max_count, "surface_bound": bound}, None,
                   "cover: 800 interior / 100 boundary / 100 outside probes; "
                   "surface: 100x100 grid")


def check_lyapunov_trichotomy(seed: int = 1009) -> dict:
    """Zero exponent through E_c, sqrt(2E - B^2)/2 above."""
    rng = np.random.default_rng(seed)
    worst_zero = 0.0
    for cfg in [_random_subcritical(rng) for _ in range(3)] + [
        MagneticConfig(1.0, 0.5), MagneticConfig(2.0, 2.0)
    ]:
        worst_zero = max(worst_zero, abs(lyapunov_exponent(cfg, 3e4)))
    worst_sup = 0.0
    for _ in range(10):
        B = rng.uniform(0.5, 2.5)
        cfg = MagneticConfig(B, 0.5 * B * B + rng.uniform(0.3, 2.0))
        got = lyapunov_exponent(cfg, 1e4)
        worst_sup = max(worst_sup, abs(got - 0.5 * cfg.gamma))
    passed = worst_zero < 1e-3 and worst_sup < 1e-3
    return _result("lyapunov-trichotomy", passed,
                   {"zero_cases": worst_zero, "supercritical_err": worst_sup},
                   1e-3, "cocycle growth rate of exp(tF), unit time step")


def check_spectrum_ladder() -> dict:
    """select_level equals the brute-force argmin; the scaled ladder top
    approaches E_c at rate O(1/k)."""
    ok = True
    for B in (0.5, 1.0, 1.5, 2.0):
        for k in range(1, 501):
            m, lam, scaled = ladder_arrays(k, B)
            if len(m) == 0:
                continue
            ec = 0.5 * B * B
            for E in np.linspace(0.0, 0.98 * ec, 50):
                idx = int(np.argmin(np.abs(scaled - E)))
                if select_level(k, B, float(E)).m != idx:
                    ok = False
    sup = 0.0
    for B in (1.0, 1.5):
        for k in range(1, 10_001):
            gaps = critical_gap(k, B)
            sup = max(sup, k * max(gaps.gap_top, gaps.gap_beyond))
    return _result("spectrum-ladder", ok and sup < 1.0,
                   {"argmin_matches": ok, "sup_k_gap": sup},
                   {"sup_k_gap": 1.0},
                   "scan k <= 500 on 50-point energy grids; gap bound to k = 10^4")


def check_bolza_integrity(seed: int = 1011) -> dict:
    """Relation residual, Gauss-Bonnet area, and reduction round trips."""
    rng = np.random.default_rng(seed)
    group = bolza_group()
    resid = relation_residual(group)
    area_err = abs(octagon_area(group) - 4.0 * math.pi)
    worst = 0.0
    for _ in range(1000):
        r = rng.uniform(0.0, 0.98 * group.inradius)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        w = from_disk(math.tanh(0.5 * r) * complex(math.cos(ang), math.sin(ang)))
        g = word_element(group, rng.integers(0, 8, size=5))
        red = reduce_point(group, g.apply(w))
        worst = max(worst, hyp_dist(red.representative, w))
    passed = resid < 1e-9 and area_err < 1e-6 and worst < 1e-8
    return _result("bolza-integrity", passed,
                   {"relation_residual": resid, "area_error": area_err,
                    "roundtrip": worst},
                   {"relation_residual": 1e-9, "area_error": 1e-6, "roundtrip": 1e-8},
                   "octagon group; 1000 random 5-letter word round trips")


def _bump(z):
    # smooth bump about the domain center; support radius 0.60 in disk
    # coordinates stays inside the octagon (in-disk inradius 0.6436), so the
    # area average needs no folding and the orbit average fluctuates little
    u = to_disk(np.asarray(z))
    s2 = (np.abs(u) / 0.60) ** 2
    safe = np.where(s2 < 1.0, s2, 0.0)
    return np.where(s2 < 1.0, np.exp(1.0 - 1.0 / (1.0 - safe)), 0.0)


def check_equidistribution(seed: int = 1012) -> dict:
    """Critical-energy Birkhoff averages reach the area average."""
    rng = np.random.default_rng(seed)
    group = bolza_group()
    cfg = MagneticConfig(1.0, 0.5)
    target = area_average(group, _bump, 800)
    worst = 0.0
    for _ in range(3):
        r = rng.uniform(0.0, 0.5)
        ang = rng.uniform(0.0, 2.0 * math.pi)
        z = from_disk(math.tanh(0.5 * r) * complex(math.cos(ang), math.sin(ang)))
        psi_a = rng.uniform(0.0, 2.0 * math.pi)
        p = Tangent(z, cfg.lam * z.imag * complex(math.cos(psi_a), math.sin(psi_a)))
        avg = birkhoff_average(group, cfg, _bump, 2000.0, p)
        worst = max(worst, abs(avg / target - 1.0))
    return _result("equidistribution", worst < 0.05,
                   {"max_rel_dev": worst, "area_average": target}, 0.05,
                   "bump observable, T = 2000, 3 random initial conditions")


def check_flow_oracle(j_sign: float = 1.0) -> dict:
    """Closed-form flow against the independent RK4 integrator on [0, 2 T_E]."""
    cfg = _STD
    T = period(cfg)
    p0 = Tangent(1j, 1j * cfg.lam)
    n_ck = 20
    step = 2.0 * T / n_ck
    cur = p0
    worst = 0.0
    speed_err = 0.0
    for k in range(1, n_ck + 1):
        cur = flow_numeric(cfg, cur, step, 1e-4, j_sign=j_sign).p
        ref = flow_exact(cfg, p0, k * step)
        worst = max(worst, hyp_dist(cur.z, ref.z))
        speed_err = max(speed_err, abs(hyp_norm(cur) - cfg.lam))
    passed = worst < 1e-8 and speed_err < 1e-8
    return _result("flow-oracle", passed,
                   {"max_divergence": worst, "speed_drift": speed_err}, 1e-8,
                   "dt = 1e-4 over [0, 2 T_E] at B = 1, E = 0.25")


CHECKS = (
    check_periodicity,
    check_footpoint_radius,
    check_profile_derivatives,
    check_jacobian_identity,
    check_density_mass,
    check_singularity_asymptotics,
    check_mc_oracle,
    check_preimage_counts,
    check_lyapunov_trichotomy,
    check_spectrum_ladder,
    check_bolza_integrity,
    check_equidistribution,
)


def run_all(j_sign: float = 1.0) -> list:
    """Run the twelve acceptance criteria plus the flow-oracle pairing."""
    results = [check() for check in CHECKS]
    results.append(check_flow_oracle(j_sign=j_sign))
    return results
