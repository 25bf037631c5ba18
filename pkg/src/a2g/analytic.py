"""Closed-form quantities of the interferer field.

All radial integrals run from an exclusion radius ``z`` to ``outer``.  The
default ``outer=inf`` gives the model quantities; a finite ``outer`` restricts
the field to an annulus, which is what the Monte Carlo estimators simulate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (LinkMode, gamma_sum_ccdf, gamma_sum_ccdf_bound, log_path_loss,
                      los_probability, mode_probability)
from .field import main_lobe_edge_radius
from .numerics import (DEFAULT_NUMERICS, NoBracket, NonConvergent, QuadResult,
                       find_root_decreasing, integrate_interval, integrate_semi_infinite,
                       regularized_gamma_upper)

MODES = (LinkMode.LOS, LinkMode.NLOS)
CCDF_MODES = ("exact", "paper_bound")
CONVENTIONS = ("paper", "protective")


class NoSolution(RuntimeError):
    """No exclusion radius meets the target.

    ``z`` is the radius reached (the main-lobe edge, or the bracket cap) and
    ``reason`` is ``"below_target_at_edge"`` or ``"bracket_cap"``.
    """

    def __init__(self, message, z, reason):
        super().__init__(message)
        self.z = z
        self.reason = reason


class DegenerateField(RuntimeError):
    pass


@dataclass(frozen=True)
class SignalCountLaw:
    mean: float

    def __post_init__(self):
        if not (self.mean >= 0 and math.isfinite(self.mean)):
            raise ValueError("signal count mean must be finite and nonnegative")

    def pmf(self, v):
        v = np.asarray(v)
        if self.mean == 0:
            out = (v == 0).astype(float)
        else:
            from scipy.special import gammaln
            out = np.exp(v * math.log(self.mean) - self.mean - gammaln(v + 1.0))
        return out if out.ndim else float(out)

    def cmf(self, v):
        return signal_count_cmf(self, v)

    def support(self):
        """Counts 0..mean + 10 sqrt(mean) + 20, which hold all but ~1e-9 of the mass."""
        return np.arange(int(self.mean + 10.0 * math.sqrt(self.mean) + 20) + 1)


@dataclass(frozen=True)
class CorrelationReport:
    rho: float
    lower_bound: float
    upper_bound: float
    w_los: float
    w_nlos: float


@dataclass(frozen=True)
class CapacityLossReport:
    delta_r: float
    error: float


def _integrate(f, z, outer, cfg):
    if math.isinf(outer):
        return integrate_semi_infinite(f, z, cfg)
    if not outer > z:
        return QuadResult(0.0, 0.0)
    # doubling panels keep features at very different scales resolvable
    total = err = 0.0
    lo, w = z, max(z, 1.0)
    while lo < outer:
        hi = min(z + w, outer)
        res = integrate_interval(f, lo, hi, 0.25 * cfg.quad_rel_tol, cfg.quad_abs_tol,
                                 cfg.max_subdivisions)
        total += res.value
        err += res.error
        lo, w = hi, 2.0 * w
    return QuadResult(total, err)


def _check_radius(z, sys):
    edge = main_lobe_edge_radius(sys.altitude_interferer, sys.beam_width)
    if z < edge * (1 - 1e-12):
        raise ValueError(f"exclusion radius {z} lies inside the main-lobe edge {edge}")


def _threshold_ccdf(ccdf_mode):
    if ccdf_mode == "exact":
        return gamma_sum_ccdf
    if ccdf_mode == "paper_bound":
        return gamma_sum_ccdf_bound
    raise ValueError(f"ccdf_mode must be one of {CCDF_MODES}")


# --- signal count -------------------------------------------------------------

def signal_count_integrand(sys, env, ch, ccdf_mode="exact"):
    """y -> y * sum_l p_l(y) * P{side-lobe power summed over antennas >= sensitivity}."""
    ccdf = _threshold_ccdf(ccdf_mode)
    h = sys.altitude_interferer
    log_gp = math.log(sys.gain_side * sys.tx_power)
    log_gamma = math.log(sys.sensitivity)

    def f(y):
        out = 0.0
        for mode in MODES:
            log_x = log_gamma - log_gp - log_path_loss(y, h, mode, ch)
            x = np.exp(np.minimum(log_x, 690.0))
            out = out + mode_probability(mode, y, h, env) * ccdf(x, ch.m(mode), sys.n_antennas)
        return y * out

    return f


def mean_signal_count(z, sys, env, ch, cfg=DEFAULT_NUMERICS, ccdf_mode="exact",
                      outer=math.inf):
    """Mean number of interferers whose summed side-lobe power clears the sensitivity.

    With ``ccdf_mode="paper_bound"`` the per-interferer detection probability
    is replaced by its min-antenna lower bound, so the result is a lower bound.
    """
    _check_radius(z, sys)
    _threshold_ccdf(ccdf_mode)
    if sys.gain_side == 0 or sys.lambda_density == 0:
        return 0.0
    res = _integrate(signal_count_integrand(sys, env, ch, ccdf_mode), z, outer, cfg)
    return 2.0 * math.pi * sys.lambda_density * res.value


def signal_count_law(z, sys, env, ch, cfg=DEFAULT_NUMERICS, ccdf_mode="exact",
                     outer=math.inf):
    return SignalCountLaw(mean_signal_count(z, sys, env, ch, cfg, ccdf_mode, outer))


def signal_count_cmf(law, v):
    """P{count <= v} for the Poisson count law."""
    v = np.asarray(v)
    if np.any(v < 0):
        raise ValueError("count must be nonnegative")
    if law.mean == 0:
        out = np.ones(v.shape)
    else:
        out = np.asarray(regularized_gamma_upper(np.floor(v) + 1.0, law.mean))
    return out if out.ndim else float(out)


def exclusion_target(epsilon, convention="paper"):
    """Mean signal count the exclusion radius must bring the field down to."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if convention == "paper":
        return math.log(1.0 / epsilon)
    if convention == "protective":
        return -math.log1p(-epsilon)
    raise ValueError(f"convention must be one of {CONVENTIONS}")


def exclusion_radius(sys, env, ch, cfg=DEFAULT_NUMERICS, convention="paper",
                     ccdf_mode="exact"):
    """Radius ``z`` with ``mean_signal_count(z) == target``.

    ``convention="paper"`` targets log(1/epsilon), so P{no detectable
    interferer} = epsilon; ``"protective"`` targets -log(1 - epsilon), so
    P{at least one} = epsilon.
    """
    target = exclusion_target(sys.epsilon, convention)
    edge = main_lobe_edge_radius(sys.altitude_interferer, sys.beam_width)

    def excess(z):
        return mean_signal_count(z, sys, env, ch, cfg, ccdf_mode) - target

    try:
        return find_root_decreasing(excess, edge, 2.0 * edge, cfg)
    except NoBracket as exc:
        at_edge = excess(edge)
        if not at_edge > 0:
            raise NoSolution(
                f"mean signal count at the main-lobe edge ({at_edge + target:.4g}) "
                f"is already below the target {target:.4g}", edge,
                "below_target_at_edge") from None
        cap = edge * 2.0 ** cfg.max_root_iterations
        raise NoSolution(f"mean signal count never fell below target: {exc}", cap,
                         "bracket_cap") from None


# --- interference moments and correlation -------------------------------------

def w_moment(mode, z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    """Integral of x * p_mode(x) * L_mode(x)^2 over the interferer window."""
    _check_radius(z_star, sys)
    h = sys.altitude_interferer

    def f(x):
        return x * mode_probability(mode, x, h, env) * np.exp(2.0 * log_path_loss(x, h, mode, ch))

    return _integrate(f, z_star, outer, cfg).value


def path_loss_moment(mode, z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    """Integral of x * p_mode(x) * L_mode(x) over the interferer window."""
    _check_radius(z_star, sys)
    h = sys.altitude_interferer

    def f(x):
        return x * mode_probability(mode, x, h, env) * np.exp(log_path_loss(x, h, mode, ch))

    return _integrate(f, z_star, outer, cfg).value


def interference_mean(z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    if sys.gain_side == 0 or sys.lambda_density == 0:
        return 0.0
    scale = 2.0 * math.pi * sys.gain_side * sys.tx_power * sys.lambda_density
    return scale * sum(path_loss_moment(m, z_star, sys, env, ch, cfg, outer) for m in MODES)


def interference_cov_and_var(z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    """(covariance between two antennas, per-antenna variance) of the interference."""
    scale = 2.0 * math.pi * (sys.gain_side * sys.tx_power) ** 2 * sys.lambda_density
    w = {m: w_moment(m, z_star, sys, env, ch, cfg, outer) for m in MODES}
    cov = scale * (w[LinkMode.LOS] + w[LinkMode.NLOS])
    var = scale * sum((ch.m(m) + 1.0) / ch.m(m) * w[m] for m in MODES)
    return cov, var


def correlation_bounds(ch):
    inv = sum(1.0 / ch.m(m) for m in MODES)
    lower = 1.0 / (1.0 + inv)
    upper = sum(ch.m(m) / (ch.m(m) + 1.0) for m in MODES)
    return lower, upper


def correlation_coefficient(z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    """Cross-antenna interference correlation.

    The gain, power and density prefactors cancel, leaving a ratio of the
    squared-path-loss moments weighted by the fading second moments.
    ``upper_bound`` is reported as derived and may exceed 1.
    """
    w_los = w_moment(LinkMode.LOS, z_star, sys, env, ch, cfg, outer)
    w_nlos = w_moment(LinkMode.NLOS, z_star, sys, env, ch, cfg, outer)
    denom = (ch.m_los + 1.0) / ch.m_los * w_los + (ch.m_nlos + 1.0) / ch.m_nlos * w_nlos
    if not denom > 0:
        raise DegenerateField("both squared path-loss moments vanish; correlation undefined")
    lower, upper = correlation_bounds(ch)
    return CorrelationReport((w_los + w_nlos) / denom, lower, upper, w_los, w_nlos)


# --- Laplace transforms and capacity loss -------------------------------------

def _laplace_exponent(v, z_star, sys, env, ch, cfg, outer):
    # 2 pi lambda sum_l int y p_l (1 - (1 + v P g L_l / m_l)^-m_l) dy
    h = sys.altitude_interferer
    log_vpg = math.log(v * sys.tx_power * sys.gain_side)

    def f(y):
        out = 0.0
        for mode in MODES:
            m = ch.m(mode)
            t = np.exp(log_vpg + log_path_loss(y, h, mode, ch)) / m
            out = out + mode_probability(mode, y, h, env) * -np.expm1(-m * np.log1p(t))
        return y * out

    return 2.0 * math.pi * sys.lambda_density * _integrate(f, z_star, outer, cfg).value


def laplace_interference(v, z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    """E[exp(-v * I)] for the per-antenna aggregate interference I."""
    return math.exp(-laplace_interference_exponent(v, z_star, sys, env, ch, cfg, outer))


def laplace_interference_exponent(v, z_star, sys, env, ch, cfg=DEFAULT_NUMERICS,
                                  outer=math.inf):
    """-log E[exp(-v * I)]; keeps precision where the transform is close to 1."""
    if v < 0:
        raise ValueError("transform variable must be nonnegative")
    _check_radius(z_star, sys)
    if v == 0 or sys.gain_side == 0 or sys.lambda_density == 0:
        return 0.0
    return _laplace_exponent(v, z_star, sys, env, ch, cfg, outer)


def signal_power_scale(mode, sys, ch):
    """Mean received power per antenna from the overhead supporting UAV in ``mode``."""
    return sys.gain_main * sys.tx_power * math.exp(
        log_path_loss(0.0, sys.altitude_support, mode, ch))


def laplace_signal(v, sys, env, ch, n_antennas=1):
    """E[exp(-v * S)] for the supporting-link power summed over ``n_antennas``.

    One propagation mode is drawn for the link; the antenna fadings given the
    mode are i.i.d. unit-mean Gamma, so their sum is Gamma with shape
    ``n_antennas * m``.
    """
    return 1.0 - _one_minus_laplace_signal(v, sys, env, ch, n_antennas)


def _one_minus_laplace_signal(v, sys, env, ch, n_antennas):
    if v < 0:
        raise ValueError("transform variable must be nonnegative")
    p_los = los_probability(0.0, sys.altitude_support, env)
    out = 0.0
    for mode, p in ((LinkMode.LOS, p_los), (LinkMode.NLOS, 1.0 - p_los)):
        m = ch.m(mode)
        t = v * signal_power_scale(mode, sys, ch) / m
        out += p * -math.expm1(-n_antennas * m * math.log1p(t))
    return out


def mean_signal_power(sys, env, ch, n_antennas=1):
    p_los = los_probability(0.0, sys.altitude_support, env)
    return n_antennas * (p_los * signal_power_scale(LinkMode.LOS, sys, ch)
                         + (1.0 - p_los) * signal_power_scale(LinkMode.NLOS, sys, ch))


def capacity_loss(z_star, sys, env, ch, cfg=DEFAULT_NUMERICS, outer=math.inf):
    """Expected rate loss in nats from side-lobe interference under combining.

    Uses log(1 + x) = int_0^inf e^-v / v (1 - e^-vx) dv, which turns the
    rate difference into int e^(-v s2) / v (1 - L_I(v)) (1 - L_S(v)) dv with
    ``L_S`` the transform of the antenna-summed supporting power.  The
    integral is taken in t = log v; below ``v_lo`` both factors are linear in
    v and that piece is added in closed form.
    """
    _check_radius(z_star, sys)
    if sys.gain_side == 0 or sys.lambda_density == 0:
        return CapacityLossReport(0.0, 0.0)
    s2 = sys.noise_power
    r = sys.n_antennas
    mean_i = interference_mean(z_star, sys, env, ch, cfg, outer)
    mean_s = mean_signal_power(sys, env, ch, r)
    v_lo = 1e-7 / max(mean_i, mean_s, s2)
    v_hi = 60.0 / s2

    def integrand(t):
        out = np.empty(len(t))
        for i, ti in enumerate(t):
            v = math.exp(ti)
            one_minus_li = -math.expm1(-laplace_interference_exponent(
                v, z_star, sys, env, ch, cfg, outer))
            one_minus_ls = _one_minus_laplace_signal(v, sys, env, ch, r)
            out[i] = math.exp(-v * s2) * one_minus_li * one_minus_ls
        return out

    rel = max(cfg.quad_rel_tol, 1e-7)
    res = integrate_interval(integrand, math.log(v_lo), math.log(v_hi), rel,
                             cfg.quad_abs_tol, cfg.max_subdivisions)
    head = 0.5 * v_lo * v_lo * mean_i * mean_s
    return CapacityLossReport(res.value + head, res.error + head * 1e-6)


def interference_free_rate(sys, env, ch, cfg=DEFAULT_NUMERICS):
    """E[log(1 + S / noise)] in nats for the antenna-summed supporting power S."""
    s2 = sys.noise_power
    r = sys.n_antennas
    mean_s = mean_signal_power(sys, env, ch, r)
    v_lo = 1e-9 / max(mean_s, s2)
    v_hi = 60.0 / s2

    def integrand(t):
        return np.array([math.exp(-math.exp(ti) * s2)
                         * _one_minus_laplace_signal(math.exp(ti), sys, env, ch, r)
                         for ti in t])

    res = integrate_interval(integrand, math.log(v_lo), math.log(v_hi),
                             max(cfg.quad_rel_tol, 1e-7), cfg.quad_abs_tol,
                             cfg.max_subdivisions)
    # below v_lo, 1 - L_S(v) ~ v E[S] and e^(-v s2) ~ 1
    return res.value + v_lo * mean_s
