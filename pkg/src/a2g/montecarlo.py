"""Direct simulation of the interferer field, used as an oracle for `analytic`.

Realizations are generated in batches.  Batch ``k`` always draws from
``stream(master_seed, k)``, and per-batch results are merged in batch order,
so estimates do not depend on how many workers produced the batches.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy.stats import binom, norm

from .channel import LinkMode, log_path_loss, los_probability
from .field import main_lobe_edge_radius, sample_batch, stream, truncation_radius

CAPACITY_MODES = ("common_interference", "per_antenna")


@dataclass(frozen=True)
class McConfig:
    """``outer_radius=None`` selects the window from the analytic tail tolerance."""

    n_realizations: int = 10_000
    master_seed: int = 0
    outer_radius: float | None = None
    tail_rel_tol: float = 1e-4
    batch_size: int = 2_000
    workers: int = 1

    def __post_init__(self):
        if self.n_realizations < 1 or self.batch_size < 1 or self.workers < 1:
            raise ValueError("n_realizations, batch_size and workers must be >= 1")

    def batches(self):
        n, b = self.n_realizations, self.batch_size
        return [(k, min(b, n - k * b)) for k in range((n + b - 1) // b)]


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_error: float
    n: int

    @classmethod
    def from_sums(cls, n, s1, s2):
        mean = s1 / n
        var = max(s2 / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
        return cls(mean, math.sqrt(var / n), n)

    @classmethod
    def from_samples(cls, x):
        x = np.asarray(x, dtype=float)
        n = len(x)
        se = float(np.std(x, ddof=1)) / math.sqrt(n) if n > 1 else 0.0
        return cls(float(np.mean(x)), se, n)


@dataclass(frozen=True)
class SignalCountSample:
    """Histogram of detectable-interferer counts over ``n`` realizations."""

    histogram: np.ndarray
    n: int
    outer_radius: float

    @property
    def pmf(self):
        return self.histogram / self.n

    @property
    def cmf(self):
        return np.cumsum(self.histogram) / self.n

    @property
    def mean(self):
        k = np.arange(len(self.histogram))
        s1 = float(k @ self.histogram)
        s2 = float((k * k) @ self.histogram)
        return McEstimate.from_sums(self.n, s1, s2)

    @property
    def variance(self):
        return self.mean.std_error ** 2 * self.n

    def cmf_at(self, v):
        c = self.cmf
        return c[v] if v < len(c) else 1.0

    def cmf_deviation(self, model_cmf, v):
        """Deviation of the empirical cmf from ``model_cmf`` at counts ``v``, in standard errors.

        Uses the exact binomial tail of the count of realizations at or
        below ``v``, mapped to the equivalent normal quantile.  Where
        ``n F (1 - F)`` is large this is ``|F_hat - F| / sqrt(F (1 - F) / n)``;
        in the far tails, where one realization can be many naive standard
        errors, it stays calibrated.
        """
        v = np.asarray(v)
        f = np.clip(np.asarray(model_cmf, dtype=float), 0.0, 1.0)
        k = np.round(np.array([self.cmf_at(int(x)) for x in v.ravel()]) * self.n).reshape(v.shape)
        return binomial_z(k, self.n, f)


def binomial_z(k, n, p):
    """Two-sided exact binomial deviation of ``k`` successes in ``n`` trials, as a normal z."""
    k, p = np.broadcast_arrays(np.asarray(k, dtype=float), np.asarray(p, dtype=float))
    lower = binom.cdf(k, n, p)
    upper = binom.sf(k - 1, n, p)
    two_sided = np.minimum(1.0, 2.0 * np.minimum(lower, upper))
    z = norm.isf(two_sided / 2.0)
    return np.where(two_sided >= 1.0, 0.0, z)


def resolve_outer(sys, env, ch, z, mc, cfg=None):
    if mc.outer_radius is not None:
        if not mc.outer_radius > z:
            raise ValueError("outer radius must exceed the exclusion radius")
        return float(mc.outer_radius)
    return truncation_radius(sys, env, ch, z, mc.tail_rel_tol, cfg)


def _run_batches(fn, mc):
    jobs = mc.batches()
    if mc.workers == 1 or len(jobs) == 1:
        return [fn(k, size) for k, size in jobs]
    with ProcessPoolExecutor(mc.workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def _point_gain(radii, los, h, ch):
    """Path loss per interferer, picking the mode-specific law."""
    out = np.empty(len(radii))
    for mode, sel in ((LinkMode.LOS, los), (LinkMode.NLOS, ~los)):
        out[sel] = np.exp(log_path_loss(radii[sel], h, mode, ch))
    return out


def interference_from_field(realization, sys, ch):
    """Per-antenna aggregate side-lobe interference of one realization."""
    gain = _point_gain(realization.radii, realization.los, sys.altitude_interferer, ch)
    return sys.gain_side * sys.tx_power * (gain @ realization.fading)


# --- signal count -------------------------------------------------------------

def _count_batch(sys, env, ch, z, outer, seed, k, size):
    b = sample_batch(sys, env, ch, z, outer, size, stream(seed, k))
    power = sys.gain_side * sys.tx_power * _point_gain(b.radii, b.los,
                                                     sys.altitude_interferer, ch)
    detected = power * b.fading.sum(axis=1) >= sys.sensitivity
    per_real = np.bincount(b.owner[detected], minlength=size)
    return np.bincount(per_real)


def estimate_signal_count_pmf(sys, env, ch, z, mc, cfg=None):
    """Empirical law of the number of interferers whose summed power clears the sensitivity."""
    _check_z(z, sys)
    outer = resolve_outer(sys, env, ch, z, mc, cfg)
    hists = _run_batches(partial(_count_batch, sys, env, ch, z, outer, mc.master_seed), mc)
    hist = np.zeros(max(len(h) for h in hists), dtype=np.int64)
    for h in hists:
        hist[:len(h)] += h
    return SignalCountSample(hist, mc.n_realizations, outer)


# --- interference ---------------------------------------------------------------

def _interference_batch(sys, env, ch, z, outer, seed, k, size):
    b = sample_batch(sys, env, ch, z, outer, size, stream(seed, k))
    gain = sys.gain_side * sys.tx_power * _point_gain(b.radii, b.los,
                                                    sys.altitude_interferer, ch)
    out = np.zeros((size, b.fading.shape[1]))
    np.add.at(out, b.owner, gain[:, None] * b.fading)
    return out


def estimate_interference_vector(sys, env, ch, z, mc, cfg=None):
    """Samples of (I_1, ..., I_R), one row per realization.

    All antennas see the same interferer positions and modes; only the
    fading differs.  Returns ``(samples, outer_radius)``.
    """
    _check_z(z, sys)
    outer = resolve_outer(sys, env, ch, z, mc, cfg)
    parts = _run_batches(partial(_interference_batch, sys, env, ch, z, outer,
                                 mc.master_seed), mc)
    return np.concatenate(parts), outer


def pearson(samples, a=0, b=1):
    x, y = samples[:, a], samples[:, b]
    return float(np.corrcoef(x, y)[0, 1])


def estimate_laplace_interference(v_grid, samples):
    """E[exp(-v I)] from per-antenna interference samples (first antenna)."""
    i1 = samples[:, 0]
    return [McEstimate.from_samples(np.exp(-v * i1)) for v in v_grid]


def _support_batch(sys, env, ch, n_antennas, seed, k, size):
    rng = stream(seed, k)
    return _support_power(sys, env, ch, n_antennas, size, rng)


def _support_power(sys, env, ch, n_antennas, size, rng):
    h = sys.altitude_support
    los = rng.random(size) < los_probability(0.0, h, env)
    shape = np.where(los, ch.m_los, ch.m_nlos)[:, None]
    fading = rng.gamma(shape, 1.0 / shape, (size, n_antennas))
    scale = np.where(los, math.exp(log_path_loss(0.0, h, LinkMode.LOS, ch)),
                     math.exp(log_path_loss(0.0, h, LinkMode.NLOS, ch)))
    return sys.gain_main * sys.tx_power * scale[:, None] * fading


def estimate_laplace_signal(v_grid, sys, env, ch, mc, n_antennas=1):
    """E[exp(-v S)] for the supporting-link power summed over ``n_antennas``."""
    parts = _run_batches(partial(_support_batch, sys, env, ch, n_antennas, mc.master_seed), mc)
    s = np.concatenate(parts).sum(axis=1)
    return [McEstimate.from_samples(np.exp(-v * s)) for v in v_grid]


# --- capacity loss --------------------------------------------------------------

def _capacity_batch(sys, env, ch, z, outer, mode, seed, k, size):
    rng = stream(seed, k)
    b = sample_batch(sys, env, ch, z, outer, size, rng)
    gain = sys.gain_side * sys.tx_power * _point_gain(b.radii, b.los,
                                                    sys.altitude_interferer, ch)
    s = _support_power(sys, env, ch, sys.n_antennas, size, rng)
    s2 = sys.noise_power
    if mode == "common_interference":
        i_hat = np.zeros(size)
        np.add.at(i_hat, b.owner, gain * b.fading[:, 0])
        total = s.sum(axis=1)
        # log(1 + S/s2) - log(1 + S/(s2 + I)) without cancellation
        gap = total * i_hat / (s2 * (s2 + i_hat))
        loss = np.log1p(gap / (1.0 + total / (s2 + i_hat)))
    else:
        i_r = np.zeros((size, sys.n_antennas))
        np.add.at(i_r, b.owner, gain[:, None] * b.fading)
        gap = (s * i_r / (s2 * (s2 + i_r))).sum(axis=1)
        loss = np.log1p(gap / (1.0 + (s / (s2 + i_r)).sum(axis=1)))
    return len(loss), math.fsum(loss), math.fsum(loss * loss)


def estimate_capacity_loss(sys, env, ch, z, mc, mode="common_interference", cfg=None):
    """Monte Carlo rate loss in nats.

    ``common_interference`` gives every antenna the same interference value
    (one fading draw per interferer); ``per_antenna`` keeps the exact
    per-antenna interference and is only a diagnostic of that simplification.
    """
    if mode not in CAPACITY_MODES:
        raise ValueError(f"mode must be one of {CAPACITY_MODES}")
    _check_z(z, sys)
    outer = resolve_outer(sys, env, ch, z, mc, cfg)
    parts = _run_batches(partial(_capacity_batch, sys, env, ch, z, outer, mode,
                                 mc.master_seed), mc)
    n = sum(p[0] for p in parts)
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    return McEstimate.from_sums(n, s1, s2)


def _check_z(z, sys):
    edge = main_lobe_edge_radius(sys.altitude_interferer, sys.beam_width)
    if z < edge * (1 - 1e-12):
        raise ValueError(f"exclusion radius {z} lies inside the main-lobe edge {edge}")
