import math
from dataclasses import replace

import numpy as np
import pytest

from a2g import analytic as an
from a2g import montecarlo as mc_
from a2g.channel import ENVIRONMENTS, ChannelParams
from a2g.field import FieldRealization, SystemParams, main_lobe_edge_radius

SYS, CH = SystemParams(), ChannelParams()
SUB, HR = ENVIRONMENTS["sub-urban"], ENVIRONMENTS["high-rise"]
EDGE = main_lobe_edge_radius(300.0, math.pi / 3)


def test_config_and_batches():
    mc = mc_.McConfig(n_realizations=4500, batch_size=2000)
    assert mc.batches() == [(0, 2000), (1, 2000), (2, 500)]
    with pytest.raises(ValueError):
        mc_.McConfig(n_realizations=0)
    with pytest.raises(ValueError):
        mc_.McConfig(batch_size=0)


def test_estimate_from_sums_matches_samples():
    x = np.random.default_rng(0).normal(size=1000)
    a = mc_.McEstimate.from_samples(x)
    b = mc_.McEstimate.from_sums(len(x), x.sum(), (x * x).sum())
    assert a.value == pytest.approx(b.value, rel=1e-12)
    assert a.std_error == pytest.approx(b.std_error, rel=1e-9)
    assert mc_.McEstimate.from_samples([3.0]).std_error == 0.0


def test_binomial_z():
    # matches the naive standard-error ratio in the bulk
    assert mc_.binomial_z(1100, 2000, 0.5) == pytest.approx(100 / math.sqrt(500), rel=0.01)
    # a single hit in the far tail is not a many-sigma event
    assert mc_.binomial_z(1, 2000, 2.34e-5) < 2.0
    assert mc_.binomial_z(0, 2000, 0.0) == 0.0 and mc_.binomial_z(2000, 2000, 1.0) == 0.0


def test_zero_density_point_mass():
    sys = replace(SYS, lambda_density=0.0)
    mc = mc_.McConfig(n_realizations=500, outer_radius=1e6)
    s = mc_.estimate_signal_count_pmf(sys, SUB, CH, EDGE, mc)
    assert s.pmf[0] == 1.0 and len(s.histogram) == 1
    assert s.cmf_at(0) == 1.0 and s.cmf_at(7) == 1.0


def test_tiny_sensitivity_counts_every_point():
    sys = replace(SYS, sensitivity=1e-300)
    inner, outer = 5e4, 5e5
    mc = mc_.McConfig(n_realizations=4000, outer_radius=outer)
    s = mc_.estimate_signal_count_pmf(sys, SUB, CH, inner, mc)
    expected = sys.lambda_density * math.pi * (outer ** 2 - inner ** 2)
    assert abs(s.mean.value - expected) < 3 * s.mean.std_error


def test_single_interferer_field():
    sys = replace(SYS, n_antennas=2)
    r0 = 1000.0
    f = FieldRealization(np.array([r0]), np.array([True]), np.ones((1, 2)), EDGE, 2e3)
    expected = sys.gain_side * sys.tx_power * (300.0 ** 2 + r0 ** 2) ** (-2.1 / 2)
    assert np.allclose(mc_.interference_from_field(f, sys, CH), expected, rtol=1e-13)


def test_outer_radius_resolution():
    mc = mc_.McConfig(outer_radius=2e5)
    assert mc_.resolve_outer(SYS, SUB, CH, 1e5, mc) == 2e5
    with pytest.raises(ValueError):
        mc_.resolve_outer(SYS, SUB, CH, 3e5, mc)
    auto = mc_.resolve_outer(SYS, SUB, CH, EDGE, mc_.McConfig())
    assert auto > EDGE


def test_rejects_radius_inside_edge():
    with pytest.raises(ValueError):
        mc_.estimate_signal_count_pmf(SYS, SUB, CH, 0.5 * EDGE, mc_.McConfig(outer_radius=1e4))


def test_same_seed_same_result_any_workers():
    z = an.exclusion_radius(SYS, HR, CH)
    base = mc_.McConfig(n_realizations=3000, batch_size=1000, master_seed=9,
                        outer_radius=1.5 * z)
    a, _ = mc_.estimate_interference_vector(SYS, HR, CH, z, base)
    b, _ = mc_.estimate_interference_vector(SYS, HR, CH, z, replace(base, workers=3))
    assert np.array_equal(a, b)
    c, _ = mc_.estimate_interference_vector(SYS, HR, CH, z, replace(base, master_seed=10))
    assert not np.array_equal(a, c)


def test_standard_error_scaling():
    z = an.exclusion_radius(SYS, HR, CH)
    mc = mc_.McConfig(n_realizations=4000, outer_radius=1.5 * z, master_seed=1)
    small = mc_.estimate_capacity_loss(SYS, HR, CH, z, mc)
    big = mc_.estimate_capacity_loss(SYS, HR, CH, z, replace(mc, n_realizations=16000))
    assert big.std_error / small.std_error == pytest.approx(0.5, rel=0.2)


def test_interference_moments_against_analytic():
    z = an.exclusion_radius(SYS, HR, CH)
    outer = 1.5 * z
    mc = mc_.McConfig(n_realizations=20000, outer_radius=outer, master_seed=3)
    samples, _ = mc_.estimate_interference_vector(SYS, HR, CH, z, mc)
    mean = an.interference_mean(z, SYS, HR, CH, outer=outer)
    est = mc_.McEstimate.from_samples(samples[:, 0])
    assert abs(est.value - mean) < 3 * est.std_error
    rep = an.correlation_coefficient(z, SYS, HR, CH, outer=outer)
    assert abs(mc_.pearson(samples) - rep.rho) < 0.02


def test_capacity_loss_zero_gain():
    sys = replace(SYS, gain_side=0.0)
    mc = mc_.McConfig(n_realizations=1000, outer_radius=1e6)
    est = mc_.estimate_capacity_loss(sys, SUB, CH, 5e5, mc)
    assert est.value == 0.0 and est.std_error == 0.0


def test_capacity_modes():
    z = an.exclusion_radius(SYS, HR, CH)
    mc = mc_.McConfig(n_realizations=5000, outer_radius=1.5 * z, master_seed=2)
    common = mc_.estimate_capacity_loss(SYS, HR, CH, z, mc, "common_interference")
    per = mc_.estimate_capacity_loss(SYS, HR, CH, z, mc, "per_antenna")
    assert common.value > 0 and per.value > 0
    with pytest.raises(ValueError):
        mc_.estimate_capacity_loss(SYS, HR, CH, z, mc, "other")


def test_laplace_signal_estimate():
    mc = mc_.McConfig(n_realizations=20000, master_seed=4)
    mean = an.mean_signal_power(SYS, SUB, CH, 2)
    v = [0.5 / mean, 2.0 / mean]
    for vi, est in zip(v, mc_.estimate_laplace_signal(v, SYS, SUB, CH, mc, n_antennas=2)):
        exact = an.laplace_signal(vi, SYS, SUB, CH, n_antennas=2)
        assert abs(est.value - exact) < 4 * est.std_error
