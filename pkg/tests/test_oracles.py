"""Reference values from independent computations (tools/derive_oracles.py).

Those were obtained with mpmath / scipy.integrate on integrands written
from scratch, at the default configuration (sub-urban unless noted).
"""
import math

import pytest

from a2g import analytic as an
from a2g.channel import ENVIRONMENTS, ChannelParams
from a2g.field import SystemParams, main_lobe_edge_radius

SYS, CH = SystemParams(), ChannelParams()
SUB, HR = ENVIRONMENTS["sub-urban"], ENVIRONMENTS["high-rise"]

EDGE = 173.20508075688773
SIGMA_EDGE = {"sub-urban": 19.5991228160876, "high-rise": 3.24882384268051}
Z_STAR = {"sub-urban": 495681.76250199, "high-rise": 132537.302479226}
RHO = {"sub-urban": 0.749999999999999, "high-rise": 0.749999999999821}
C0 = {"sub-urban": 18.7029303425897, "high-rise": 17.4592822444603}
# on the window [Z*, 1.5 Z*] in sub-urban
MEAN_I_WINDOW = 7.678425774355195e-08
LAPLACE_I_WINDOW = {0.1: 0.9051044089269737, 1.0: 0.3786382334051192}
DELTA_R_WINDOW = 0.07382913829498987


def test_edge():
    assert main_lobe_edge_radius(300.0, math.pi / 3) == pytest.approx(EDGE, rel=1e-15)


@pytest.mark.parametrize("name", ["sub-urban", "high-rise"])
def test_mean_count_at_edge(name):
    got = an.mean_signal_count(EDGE, SYS, ENVIRONMENTS[name], CH)
    assert got == pytest.approx(SIGMA_EDGE[name], rel=1e-9)


@pytest.mark.parametrize("name", ["sub-urban", "high-rise"])
def test_exclusion_radius(name):
    got = an.exclusion_radius(SYS, ENVIRONMENTS[name], CH)
    assert got == pytest.approx(Z_STAR[name], rel=1e-8)


@pytest.mark.parametrize("name", ["sub-urban", "high-rise"])
def test_correlation(name):
    got = an.correlation_coefficient(Z_STAR[name], SYS, ENVIRONMENTS[name], CH).rho
    assert got == pytest.approx(RHO[name], abs=1e-12)


@pytest.mark.parametrize("name", ["sub-urban", "high-rise"])
def test_interference_free_rate(name):
    got = an.interference_free_rate(SYS, ENVIRONMENTS[name], CH)
    assert got == pytest.approx(C0[name], rel=1e-8)


def test_window_interference_mean():
    z = Z_STAR["sub-urban"]
    got = an.interference_mean(z, SYS, SUB, CH, outer=1.5 * z)
    assert got == pytest.approx(MEAN_I_WINDOW, rel=1e-9)


@pytest.mark.parametrize("c", [0.1, 1.0])
def test_window_laplace_interference(c):
    z = Z_STAR["sub-urban"]
    got = an.laplace_interference(c / MEAN_I_WINDOW, z, SYS, SUB, CH, outer=1.5 * z)
    assert got == pytest.approx(LAPLACE_I_WINDOW[c], rel=1e-9)


def test_laplace_signal():
    assert an.laplace_signal(1e-3, SYS, SUB, CH, 1) == pytest.approx(0.931109552293955, rel=1e-13)
    assert an.laplace_signal(1e-3, SYS, SUB, CH, 2) == pytest.approx(0.8669649983730493, rel=1e-13)


def test_window_capacity_loss():
    z = Z_STAR["sub-urban"]
    got = an.capacity_loss(z, SYS, SUB, CH, outer=1.5 * z).delta_r
    assert got == pytest.approx(DELTA_R_WINDOW, rel=1e-7)
