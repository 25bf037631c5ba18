"""Exclusion-zone geometry and the Poisson field of interfering UAVs."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import LinkMode, los_probability

KM2 = 1e6  # square metres per square kilometre


def per_km2(density):
    """Convert a density in UAVs per km^2 to UAVs per m^2."""
    return density / KM2


@dataclass(frozen=True)
class SystemParams:
    """System-level constants.  Lengths in metres, ``lambda_density`` per m^2.

    ``tx_power`` is an effective transmit power: it is only ever multiplied
    with the path-loss intercept, so the two are interchangeable.
    """

    lambda_density: float = per_km2(1e-3)
    tx_power: float = 1.15e6
    gain_main: float = 10.0
    gain_side: float = 10.0 / 2500
    altitude_interferer: float = 300.0
    altitude_support: float = 300.0
    beam_width: float = math.pi / 3
    sensitivity: float = 1e-8
    noise_power: float = 1e-6
    n_antennas: int = 2
    epsilon: float = 0.05

    def __post_init__(self):
        if self.lambda_density < 0:
            raise ValueError("lambda_density must be nonnegative")
        if not 0 <= self.gain_side < self.gain_main:
            raise ValueError("need 0 <= gain_side < gain_main")
        if not 0 < self.beam_width < math.pi:
            raise ValueError("beam_width must lie in (0, pi)")
        if self.n_antennas < 2 or int(self.n_antennas) != self.n_antennas:
            raise ValueError("n_antennas must be an integer >= 2")
        if not (self.sensitivity > 0 and self.noise_power > 0):
            raise ValueError("sensitivity and noise_power must be positive")
        if not (self.altitude_interferer > 0 and self.altitude_support > 0):
            raise ValueError("altitudes must be positive")
        if not (self.tx_power > 0):
            raise ValueError("tx_power must be positive")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")

    @property
    def gain_ratio(self):
        return self.gain_main / self.gain_side if self.gain_side > 0 else math.inf


@dataclass(frozen=True)
class FieldRealization:
    radii: np.ndarray
    los: np.ndarray  # bool per interferer
    fading: np.ndarray  # (n_interferers, n_antennas)
    inner_radius: float
    outer_radius: float
    seed: object = None

    def __post_init__(self):
        for arr in (self.radii, self.los, self.fading):
            arr.setflags(write=False)

    def __len__(self):
        return len(self.radii)

    @property
    def interferers(self):
        """(radius, mode, fading row) triples."""
        return [(float(r), LinkMode.LOS if l else LinkMode.NLOS, f)
                for r, l, f in zip(self.radii, self.los, self.fading)]


def main_lobe_edge_radius(h, beam_width):
    """Ground radius inside which a UAV at altitude ``h`` covers the origin with its main lobe."""
    if not h > 0:
        raise ValueError("altitude must be positive")
    if not 0 < beam_width < math.pi:
        raise ValueError("beam_width must lie in (0, pi)")
    return h / math.tan(math.pi / 2 - beam_width / 2)


def stream(master_seed, *keys):
    """Independent Philox generator for ``keys`` under ``master_seed``.

    The same (seed, keys) pair always yields the same stream, regardless of
    which process asks for it.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class _Batch:
    counts: np.ndarray  # interferers per realization
    radii: np.ndarray
    los: np.ndarray
    fading: np.ndarray  # (total, n_fading)
    owner: np.ndarray = field(default=None)  # realization index per interferer

    def __post_init__(self):
        if self.owner is None:
            self.owner = np.repeat(np.arange(len(self.counts)), self.counts)


def _check_window(sys, inner, outer):
    if not inner < outer:
        raise ValueError(f"inner radius {inner} must be below outer radius {outer}")
    edge = main_lobe_edge_radius(sys.altitude_interferer, sys.beam_width)
    if inner < edge * (1 - 1e-12):
        raise ValueError(f"inner radius {inner} lies inside the main-lobe edge {edge}")


def sample_batch(sys, env, ch, inner, outer, n_realizations, rng, n_fading=None):
    """Draw ``n_realizations`` independent fields on the annulus in one go."""
    _check_window(sys, inner, outer)
    n_fading = sys.n_antennas if n_fading is None else n_fading
    area = math.pi * (outer * outer - inner * inner)
    counts = rng.poisson(sys.lambda_density * area, n_realizations)
    total = int(counts.sum())
    u = rng.random(total)
    radii = np.sqrt(inner * inner + u * (outer * outer - inner * inner))
    los = rng.random(total) < los_probability(radii, sys.altitude_interferer, env)
    shape = np.where(los, ch.m_los, ch.m_nlos)[:, None]
    fading = rng.gamma(shape, 1.0 / shape, (total, n_fading))
    return _Batch(counts, radii, los, fading)


def sample_field(sys, env, ch, inner, outer, rng, seed=None):
    """One realization of the interferer field on ``inner <= r <= outer``."""
    b = sample_batch(sys, env, ch, inner, outer, 1, rng)
    return FieldRealization(b.radii, b.los, b.fading, float(inner), float(outer), seed)


def truncation_radius(sys, env, ch, inner, rel_tol=1e-4, cfg=None, max_doublings=60):
    """Smallest ``inner * 2^k`` beyond which the signal-count and squared
    path-loss integrals keep less than ``rel_tol`` of their totals."""
    from . import analytic
    from .numerics import DEFAULT_NUMERICS, NonConvergent

    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    cfg = cfg or DEFAULT_NUMERICS
    sigma_total = analytic.mean_signal_count(inner, sys, env, ch, cfg)
    w_total = sum(analytic.w_moment(m, inner, sys, env, ch, cfg) for m in LinkMode)
    r = 2.0 * inner if inner > 0 else 1.0
    for _ in range(max_doublings):
        sigma_tail = analytic.mean_signal_count(r, sys, env, ch, cfg)
        w_tail = sum(analytic.w_moment(m, r, sys, env, ch, cfg) for m in LinkMode)
        if sigma_tail <= rel_tol * sigma_total and w_tail <= rel_tol * w_total:
            return r
        r *= 2.0
    raise NonConvergent(f"truncation search exceeded {max_doublings} doublings", r)
