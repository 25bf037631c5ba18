"""Air-to-ground propagation: LOS probability, dual-mode path loss, Gamma fading."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, gammaln

from .numerics import regularized_gamma_upper


class LinkMode(enum.Enum):
    LOS = "los"
    NLOS = "nlos"


@dataclass(frozen=True)
class Environment:
    phi: float
    psi_env: float
    name: str = "custom"

    def __post_init__(self):
        if not (self.phi > 0 and self.psi_env > 0):
            raise ValueError("environment parameters phi and psi_env must be positive")


ENVIRONMENTS = {
    "high-rise": Environment(27.23, 0.08, "high-rise"),
    "dense-urban": Environment(12.08, 0.11, "dense-urban"),
    "urban": Environment(9.61, 0.16, "urban"),
    "sub-urban": Environment(4.88, 0.43, "sub-urban"),
}


def environment(name):
    try:
        return ENVIRONMENTS[name]
    except KeyError:
        raise ValueError(f"unknown environment {name!r}; "
                         f"expected one of {sorted(ENVIRONMENTS)}") from None


@dataclass(frozen=True)
class ChannelParams:
    """Path-loss exponents/intercepts and Nakagami shapes for both link modes.

    Intercepts are linear power gains at 1 m.  The defaults are placeholders
    for constants the model leaves open; they are not measured values.
    """

    alpha_los: float = 2.1
    alpha_nlos: float = 3.5
    k_los: float = 1.0
    k_nlos: float = 1.0
    m_los: float = 3
    m_nlos: float = 1

    def __post_init__(self):
        if not self.alpha_los < self.alpha_nlos:
            raise ValueError("alpha_los must be smaller than alpha_nlos")
        if not (self.k_los > 0 and self.k_nlos > 0):
            raise ValueError("path-loss intercepts must be positive")
        if not self.m_los >= self.m_nlos >= 1:
            raise ValueError("Nakagami shapes must satisfy m_los >= m_nlos >= 1")

    def alpha(self, mode):
        return self.alpha_los if mode is LinkMode.LOS else self.alpha_nlos

    def k(self, mode):
        return self.k_los if mode is LinkMode.LOS else self.k_nlos

    def m(self, mode):
        return self.m_los if mode is LinkMode.LOS else self.m_nlos


def _check_geometry(r, h):
    if np.any(np.asarray(h) <= 0):
        raise ValueError("altitude must be positive")
    if np.any(np.asarray(r) < 0):
        raise ValueError("ground distance must be nonnegative")


def elevation_deg(r, h):
    """Elevation angle in degrees; 90 directly overhead."""
    return np.degrees(np.arctan2(h, r))


def los_probability(r, h, env):
    """1 / (1 + phi * exp(-psi * (elevation_deg - phi)))."""
    _check_geometry(r, h)
    theta = elevation_deg(np.asarray(r, dtype=float), h)
    p = expit(env.psi_env * (theta - env.phi) - math.log(env.phi))
    return p if np.ndim(p) else float(p)


def nlos_probability(r, h, env):
    _check_geometry(r, h)
    theta = elevation_deg(np.asarray(r, dtype=float), h)
    p = expit(math.log(env.phi) - env.psi_env * (theta - env.phi))
    return p if np.ndim(p) else float(p)


def mode_probability(mode, r, h, env):
    return los_probability(r, h, env) if mode is LinkMode.LOS else nlos_probability(r, h, env)


def path_loss(r, h, mode, ch):
    """K * (h^2 + r^2)^(-alpha/2) as a linear power gain."""
    _check_geometry(r, h)
    return np.exp(log_path_loss(r, h, mode, ch))


def log_path_loss(r, h, mode, ch):
    r = np.asarray(r, dtype=float)
    return math.log(ch.k(mode)) - ch.alpha(mode) * np.log(np.hypot(h, r))


def fading_sample(mode, ch, rng, size=None):
    """Unit-mean Gamma(m, 1/m) power gain draws."""
    m = ch.m(mode)
    return rng.gamma(m, 1.0 / m, size)


def gamma_sum_ccdf(x, shape, n=1):
    """P{V_1 + ... + V_n >= x} for i.i.d. V ~ Gamma(shape, 1/shape)."""
    x = np.asarray(x, dtype=float)
    return regularized_gamma_upper(n * shape, shape * x)


def gamma_sum_ccdf_bound(x, shape, n=1):
    """(P{V >= x/n})^n, a lower bound on :func:`gamma_sum_ccdf`.

    Every ``V_r >= x/n`` forces the sum past ``x``.  Integer shapes use the
    terminating Erlang series (summed in log space so large ``x`` underflows
    to 0 instead of producing inf * 0).
    """
    if n == 1:
        # the bound is an identity here; share the exact path so rounding agrees
        return gamma_sum_ccdf(x, shape, 1)
    x = np.asarray(x, dtype=float)
    y = shape * x / n
    if float(shape).is_integer():
        k = np.arange(int(shape)).reshape((-1,) + (1,) * y.ndim)
        with np.errstate(divide="ignore", invalid="ignore"):
            logy = np.log(y)
            terms = np.where(k == 0, 0.0, k * logy) - gammaln(k + 1.0)
        log_single = np.logaddexp.reduce(terms, axis=0) - y
        out = np.exp(n * log_single)
    else:
        out = np.asarray(regularized_gamma_upper(shape, y)) ** n
    return out if out.ndim else float(out)


def sum_fading_ccdf_exact(x, mode, n, ch):
    if n < 1:
        raise ValueError("antenna count must be at least 1")
    out = gamma_sum_ccdf(x, ch.m(mode), n)
    return out


def sum_fading_ccdf_bound(x, mode, n, ch):
    if n < 1:
        raise ValueError("antenna count must be at least 1")
    return gamma_sum_ccdf_bound(x, ch.m(mode), n)
