import math
from dataclasses import replace

import numpy as np
import pytest
from scipy import stats

from a2g import analytic as an
from a2g.channel import ENVIRONMENTS, ChannelParams, LinkMode, los_probability
from a2g.field import (SystemParams, main_lobe_edge_radius, per_km2, sample_batch,
                       sample_field, stream, truncation_radius)

SYS, CH, SUB = SystemParams(), ChannelParams(), ENVIRONMENTS["sub-urban"]
EDGE = main_lobe_edge_radius(300.0, math.pi / 3)


def test_density_conversion():
    assert per_km2(1e-3) == 1e-9
    assert SYS.lambda_density == 1e-9


def test_system_validation():
    with pytest.raises(ValueError):
        SystemParams(gain_side=20.0)
    with pytest.raises(ValueError):
        SystemParams(n_antennas=1)
    with pytest.raises(ValueError):
        SystemParams(beam_width=math.pi)
    with pytest.raises(ValueError):
        SystemParams(epsilon=1.0)
    with pytest.raises(ValueError):
        SystemParams(noise_power=0.0)
    assert SystemParams(gain_side=0.0).gain_ratio == math.inf
    assert SYS.gain_ratio == pytest.approx(2500.0)


def test_main_lobe_edge():
    assert main_lobe_edge_radius(100.0, math.pi / 2) == pytest.approx(100.0, rel=1e-14)
    assert main_lobe_edge_radius(100.0, 1e-9) < 1e-6
    assert EDGE == pytest.approx(300.0 / math.sqrt(3), rel=1e-14)
    with pytest.raises(ValueError):
        main_lobe_edge_radius(100.0, math.pi)
    with pytest.raises(ValueError):
        main_lobe_edge_radius(0.0, 1.0)


def test_window_validation():
    rng = stream(0)
    with pytest.raises(ValueError):
        sample_field(SYS, SUB, CH, 1e4, 1e4, rng)
    with pytest.raises(ValueError):
        sample_field(SYS, SUB, CH, 0.5 * EDGE, 1e4, rng)


def test_empty_field_when_lambda_zero():
    sys = replace(SYS, lambda_density=0.0)
    f = sample_field(sys, SUB, CH, EDGE, 1e6, stream(0))
    assert len(f) == 0 and f.interferers == []


def test_realization_contents():
    f = sample_field(SYS, SUB, CH, 5e4, 5e5, stream(3), seed=3)
    assert len(f) > 0
    assert np.all((f.radii >= 5e4) & (f.radii <= 5e5))
    assert f.fading.shape == (len(f), SYS.n_antennas) and np.all(f.fading > 0)
    r, mode, fad = f.interferers[0]
    assert isinstance(mode, LinkMode) and fad.shape == (SYS.n_antennas,)
    with pytest.raises(ValueError):
        f.radii[0] = 1.0


def test_seed_reproduces_realization():
    a = sample_field(SYS, SUB, CH, 5e4, 5e5, stream(11, 4))
    b = sample_field(SYS, SUB, CH, 5e4, 5e5, stream(11, 4))
    assert np.array_equal(a.radii, b.radii) and np.array_equal(a.fading, b.fading)
    assert np.array_equal(a.los, b.los)


def test_poisson_mean_count():
    inner, outer = 5e4, 5e5
    expected = 1e-9 * math.pi * (outer ** 2 - inner ** 2)
    assert expected == pytest.approx(777.5, abs=0.1)
    b = sample_batch(SYS, SUB, CH, inner, outer, 10_000, stream(5))
    assert abs(b.counts.mean() - expected) < 0.01 * expected
    assert abs(b.counts.mean() - expected) < 3 * math.sqrt(expected / 10_000)
    assert 0.95 <= b.counts.var() / b.counts.mean() <= 1.05


def test_uniform_in_area():
    inner, outer = 5e4, 5e5
    b = sample_batch(SYS, SUB, CH, inner, outer, 10_000, stream(6))
    edges = np.sqrt(np.linspace(inner ** 2, outer ** 2, 11))  # equal-area rings
    observed, _ = np.histogram(b.radii, edges)
    p = stats.chisquare(observed).pvalue
    assert p > 1e-3


def test_los_fraction_per_ring():
    env = ENVIRONMENTS["high-rise"]
    b = sample_batch(SYS, env, CH, EDGE, 5e3, 20_000, stream(7))
    edges = np.linspace(EDGE, 5e3, 9)
    for lo, hi in zip(edges, edges[1:]):
        sel = (b.radii >= lo) & (b.radii < hi)
        frac = b.los[sel].mean()
        mid_p = los_probability(b.radii[sel], SYS.altitude_interferer, env).mean()
        se = math.sqrt(mid_p * (1 - mid_p) / sel.sum())
        assert abs(frac - mid_p) < 3 * se


def test_truncation_radius():
    r_loose = truncation_radius(SYS, SUB, CH, EDGE, rel_tol=1e-2)
    r_tight = truncation_radius(SYS, SUB, CH, EDGE, rel_tol=1e-4)
    assert r_tight >= r_loose
    total = an.mean_signal_count(EDGE, SYS, SUB, CH)
    inside = an.mean_signal_count(EDGE, SYS, SUB, CH, outer=r_tight)
    inside2 = an.mean_signal_count(EDGE, SYS, SUB, CH, outer=2 * r_tight)
    assert (total - inside) <= 1e-4 * total
    assert abs(inside2 - inside) < 1e-4 * inside
    with pytest.raises(ValueError):
        truncation_radius(SYS, SUB, CH, EDGE, rel_tol=1.5)
