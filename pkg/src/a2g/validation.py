"""Invariant and oracle checks run by ``a2g validate``.

Each check returns a :class:`Check`.  Sample sizes are reduced relative to
the test suite; Monte Carlo tolerances are sized in standard errors so that a
different seed moves the observed values but not the verdicts.  Checks that
scan many points at once (cmf over every count, CCDF over 20 quantiles) use
4 standard errors as their family-wise bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import analytic as an
from . import montecarlo as mc_
from .channel import (LinkMode, gamma_sum_ccdf, gamma_sum_ccdf_bound, los_probability,
                      nlos_probability)
from .field import main_lobe_edge_radius, stream
from .numerics import find_root_decreasing, integrate_semi_infinite, regularized_gamma_upper


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    observed: float
    tolerance: float
    detail: str = ""

    @property
    def status(self):
        return "pass" if self.passed else "fail"


def _check(name, observed, tolerance, detail="", passed=None):
    observed = float(observed)
    if passed is None:
        passed = observed <= tolerance
    return Check(name, bool(passed), observed, float(tolerance), detail)


def _solve_z(cfg, sys=None):
    sys = sys or cfg.system
    try:
        return an.exclusion_radius(sys, cfg.environment, cfg.channel, cfg.numerics,
                                   cfg.sweep["convention"], cfg.sweep["ccdf_mode"]), "solved"
    except an.NoSolution as exc:
        return exc.z, exc.reason


def numerics_checks(cfg):
    num = cfg.numerics
    golden = max(
        abs(integrate_semi_infinite(lambda x: np.exp(-x), 0.0, num).value - 1.0),
        abs(integrate_semi_infinite(lambda x: 1.0 / x ** 2, 1.0, num).value - 1.0),
        abs(integrate_semi_infinite(lambda x: x * np.exp(-x * x), 0.0, num).value - 0.5),
    )
    yield _check("quadrature_golden_integrals", golden, 1e-8)
    yield _check("gamma_q_2_2", abs(regularized_gamma_upper(2.0, 2.0) - 3 * math.exp(-2)), 1e-10)
    x = np.linspace(0.0, 40.0, 81)
    worst = 0.0
    for a in range(1, 21):
        k = np.arange(a)[:, None]
        series = np.exp(-x) * np.sum(x ** k / np.array([math.factorial(i) for i in range(a)])[:, None],
                                     axis=0)
        worst = max(worst, float(np.max(np.abs(regularized_gamma_upper(float(a), x) - series))))
    yield _check("gamma_q_integer_series", worst, 1e-10)
    root = find_root_decreasing(lambda t: math.exp(-t) - 0.5, 0.0, 10.0, num)
    yield _check("root_ln2", abs(root - math.log(2)), 1e-9)


def channel_checks(cfg, rng):
    env, ch = cfg.environment, cfg.channel
    r = np.geomspace(1.0, 1e7, 200)
    worst = 0.0
    for h in (10.0, 300.0, 3000.0):
        worst = max(worst, float(np.max(np.abs(los_probability(r, h, env)
                                               + nlos_probability(r, h, env) - 1.0))))
    yield _check("los_nlos_complement", worst, 1e-12)

    xs = rng.uniform(0.0, 30.0, 1000)
    ns = rng.integers(1, 9, 1000)
    ms = rng.integers(1, 21, 1000)
    # 1e-12 relative slack absorbs last-bit ties where both sides round to ~1
    violations = sum(gamma_sum_ccdf_bound(x, float(m), int(n))
                     > gamma_sum_ccdf(x, float(m), int(n)) * (1 + 1e-12)
                     for x, n, m in zip(xs, ns, ms))
    yield _check("ccdf_bound_below_exact", violations, 0, "1000 random (x, n, m)")

    n_draw, n_ant = 200_000, cfg.system.n_antennas
    worst = 0.0
    for mode in LinkMode:
        m = ch.m(mode)
        sums = rng.gamma(m, 1.0 / m, (n_draw, n_ant)).sum(axis=1)
        qs = np.quantile(sums, np.linspace(0.025, 0.975, 20))
        exact = gamma_sum_ccdf(qs, m, n_ant)
        emp = np.array([(sums >= q).mean() for q in qs])
        se = np.sqrt(exact * (1 - exact) / n_draw)
        worst = max(worst, float(np.max(np.abs(emp - exact) / se)))
    yield _check("ccdf_exact_vs_sampled_se", worst, 4.0, "max deviation in SE over 20 quantiles")


def signal_count_checks(cfg, n_real):
    sys, env, ch, num = cfg.system, cfg.environment, cfg.channel, cfg.numerics
    edge = main_lobe_edge_radius(sys.altitude_interferer, sys.beam_width)
    mc = replace(cfg.montecarlo, n_realizations=n_real, outer_radius=None)
    sample = mc_.estimate_signal_count_pmf(sys, env, ch, edge, mc, num)
    analytic_mean = an.mean_signal_count(edge, sys, env, ch, num, outer=sample.outer_radius)
    est = sample.mean
    se = max(est.std_error, math.sqrt(max(analytic_mean, 1e-12) / n_real))
    yield _check("signal_count_mean_vs_mc_se", abs(est.value - analytic_mean) / se, 3.0,
                 f"analytic={analytic_mean:.6g} mc={est.value:.6g}")
    if est.value > 0:
        ratio = sample.variance / est.value
        yield _check("signal_count_dispersion", abs(ratio - 1.0), 3.0 * math.sqrt(2.0 / n_real),
                     f"var/mean={ratio:.4f}")
    law = an.SignalCountLaw(analytic_mean)
    v = np.arange(len(sample.histogram) + 5)
    f = law.cmf(v)
    worst = float(np.max(sample.cmf_deviation(f, v)))
    yield _check("signal_count_cmf_vs_mc_se", worst, 4.0,
                 "max over all counts, exact binomial tail in SE units")

    zs = [edge, 2 * edge, 10 * edge]
    bad = sum(an.mean_signal_count(z, sys, env, ch, num, "paper_bound")
              > an.mean_signal_count(z, sys, env, ch, num, "exact") for z in zs)
    yield _check("signal_count_bound_below_exact", bad, 0)


def exclusion_checks(cfg):
    sys, env, ch, num = cfg.system, cfg.environment, cfg.channel, cfg.numerics
    conv, mode = cfg.sweep["convention"], cfg.sweep["ccdf_mode"]
    z, status = _solve_z(cfg)
    if status == "solved":
        target = an.exclusion_target(sys.epsilon, conv)
        got = an.mean_signal_count(z, sys, env, ch, num, mode)
        yield _check("zstar_fixed_point", abs(got - target) / target, 1e-3, f"z*={z:.6g}")
    else:
        yield _check("zstar_fixed_point", 0.0, 1e-3, f"no solution ({status}); skipped")
    zs = []
    for ratio in sorted(cfg.sweep["gain_ratios"], reverse=True):
        s = replace(sys, gain_side=sys.gain_main / ratio)
        zs.append(_solve_z(cfg, s))
    solved = [z for z, st in zs if st == "solved"]
    increasing = all(b > a for a, b in zip(solved, solved[1:]))
    yield _check("zstar_increases_with_g", 0.0 if increasing else 1.0, 0.0,
                 f"{len(solved)} of {len(zs)} gain points solvable")


def correlation_checks(cfg, n_real):
    sys, env, ch, num = cfg.system, cfg.environment, cfg.channel, cfg.numerics
    z, _ = _solve_z(cfg)
    outer = cfg.sweep["outer_factor"] * z
    rep = an.correlation_coefficient(z, sys, env, ch, num, outer=outer)
    mc = replace(cfg.montecarlo, n_realizations=n_real, outer_radius=outer)
    samples, _ = mc_.estimate_interference_vector(sys, env, ch, z, mc, num)
    yield _check("correlation_vs_mc", abs(mc_.pearson(samples) - rep.rho), 0.02,
                 f"rho={rep.rho:.6f}")
    ok = rep.lower_bound <= rep.rho <= min(1.0, rep.upper_bound)
    yield _check("correlation_bounds", 0.0 if ok else 1.0, 0.0,
                 f"{rep.lower_bound:.4f} <= {rep.rho:.4f} <= {min(1.0, rep.upper_bound):.4f}")
    scaled = replace(sys, gain_side=10 * sys.gain_side, tx_power=10 * sys.tx_power,
                     lambda_density=10 * sys.lambda_density)
    if scaled.gain_side < scaled.gain_main:
        rho2 = an.correlation_coefficient(z, scaled, env, ch, num, outer=outer).rho
        yield _check("correlation_scale_invariance", abs(rho2 - rep.rho), 1e-9)

    mean = an.interference_mean(z, sys, env, ch, num, outer=outer)
    est = mc_.McEstimate.from_samples(samples[:, 0])
    yield _check("interference_mean_vs_mc_se", abs(est.value - mean) / est.std_error, 3.0)

    v_grid = [c / mean for c in (0.05, 0.1, 0.25, 0.5, 1.0)]
    lap_mc = mc_.estimate_laplace_interference(v_grid, samples)
    worst = max(abs(e.value - an.laplace_interference(v, z, sys, env, ch, num, outer))
                / e.value for v, e in zip(v_grid, lap_mc))
    yield _check("laplace_interference_vs_mc", worst, 0.01)

    s_mean = an.mean_signal_power(sys, env, ch)
    v_grid = [c / s_mean for c in (0.05, 0.1, 0.25, 0.5, 1.0)]
    lap_mc = mc_.estimate_laplace_signal(v_grid, sys, env, ch, mc)
    worst = max(abs(e.value - an.laplace_signal(v, sys, env, ch)) / e.value
                for v, e in zip(v_grid, lap_mc))
    yield _check("laplace_signal_vs_mc", worst, 0.01)


def capacity_checks(cfg, n_real):
    sys, env, ch, num = cfg.system, cfg.environment, cfg.channel, cfg.numerics
    z, _ = _solve_z(cfg)
    outer = cfg.sweep["outer_factor"] * z
    rep = an.capacity_loss(z, sys, env, ch, num, outer)
    mc = replace(cfg.montecarlo, n_realizations=n_real, outer_radius=outer)
    est = mc_.estimate_capacity_loss(sys, env, ch, z, mc, "common_interference", num)
    tol = max(0.02, 3.0 * est.std_error / rep.delta_r) if rep.delta_r > 0 else 0.02
    rel = abs(est.value - rep.delta_r) / rep.delta_r if rep.delta_r > 0 else abs(est.value)
    yield _check("capacity_loss_vs_mc", rel, tol, f"analytic={rep.delta_r:.6g} mc={est.value:.6g}")
    zero_g = an.capacity_loss(z, replace(sys, gain_side=0.0), env, ch, num).delta_r
    zero_l = an.capacity_loss(z, replace(sys, lambda_density=0.0), env, ch, num).delta_r
    yield _check("capacity_loss_zero_cases", max(abs(zero_g), abs(zero_l)), 0.0)


def run_checks(cfg, scale=1.0):
    """All checks; ``scale`` multiplies the Monte Carlo sample sizes."""
    rng = stream(cfg.montecarlo.master_seed, 999)
    checks = []
    checks += numerics_checks(cfg)
    checks += channel_checks(cfg, rng)
    checks += signal_count_checks(cfg, max(200, int(2000 * scale)))
    checks += exclusion_checks(cfg)
    checks += correlation_checks(cfg, max(1000, int(20000 * scale)))
    checks += capacity_checks(cfg, max(1000, int(20000 * scale)))
    return checks
