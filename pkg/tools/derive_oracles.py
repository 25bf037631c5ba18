"""Independent reference values frozen into tests/test_oracles.py.

Nothing here imports ``a2g``: every integrand is written from scratch and
integrated with mpmath (high precision) or scipy.integrate.quad.  Run with
``python3 tools/derive_oracles.py`` and paste the printed values.
"""
import math

import mpmath as mp
from scipy import integrate

mp.mp.dps = 30

# defaults of the reference configuration
LAM = 1e-9            # per m^2 (1e-3 per km^2)
P = 1.15e6
G = 10.0
g = G / 2500
H = 300.0
H_SUP = 300.0
OMEGA = mp.pi / 3
GAMMA = 1e-8
S2 = 1e-6
R = 2
EPS = 0.05
A_L, A_N = 2.1, 3.5
M_L, M_N = 3, 1
ENVS = {"sub-urban": (4.88, 0.43), "urban": (9.61, 0.16),
        "dense-urban": (12.08, 0.11), "high-rise": (27.23, 0.08)}


def p_los(r, h, env):
    phi, psi = ENVS[env]
    theta = mp.degrees(mp.atan2(h, r))
    return 1 / (1 + phi * mp.exp(-psi * (theta - phi)))


def path_loss(r, h, alpha):
    return (h * h + r * r) ** (-mp.mpf(alpha) / 2)


def q_upper(a, x):
    return mp.gammainc(a, x, mp.inf, regularized=True)


def edge():
    return H / mp.tan(mp.pi / 2 - OMEGA / 2)


def sigma_bar(z, env, gs=g):
    def f(y):
        pl = p_los(y, H, env)
        out = 0
        for p, a, m in ((pl, A_L, M_L), (1 - pl, A_N, M_N)):
            x = GAMMA / (gs * P * path_loss(y, H, a))
            out += p * q_upper(R * m, m * x)
        return 2 * mp.pi * LAM * y * out
    pts = [z] + [z * 2 ** k for k in range(1, 40)] + [mp.inf]
    return mp.quad(f, pts)


def z_star(env, gs=g):
    target = math.log(1 / EPS)
    lo, hi = float(edge()), 2 * float(edge())
    while sigma_bar(hi, env, gs) > target:
        hi *= 2
    return mp.findroot(lambda z: sigma_bar(z, env, gs) - target, (lo, hi), solver="anderson")


def w_moments(z, env):
    def wl(y):
        return y * p_los(y, H, env) * path_loss(y, H, A_L) ** 2

    def wn(y):
        return y * (1 - p_los(y, H, env)) * path_loss(y, H, A_N) ** 2
    pts = [z] + [z * 2 ** k for k in range(1, 40)] + [mp.inf]
    return mp.quad(wl, pts), mp.quad(wn, pts)


def rho(z, env):
    wl, wn = w_moments(z, env)
    return (wl + wn) / ((M_L + 1) / mp.mpf(M_L) * wl + (M_N + 1) / mp.mpf(M_N) * wn)


def _q(f, a, b):
    """scipy quad over [a, b] split at doublings so long tails stay accurate."""
    edges = [a]
    while edges[-1] < b:
        edges.append(min(2 * edges[-1], b))
    return math.fsum(integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-12, limit=500)[0]
                     for lo, hi in zip(edges, edges[1:]))


def _pl(y, env):
    phi, psi = ENVS[env]
    theta = math.degrees(math.atan2(H, y))
    return 1 / (1 + phi * math.exp(-psi * (theta - phi)))


def interference_mean(z, env, outer):
    def f(y):
        pl = _pl(y, env)
        return y * (pl * (H * H + y * y) ** (-A_L / 2) + (1 - pl) * (H * H + y * y) ** (-A_N / 2))
    return 2 * math.pi * LAM * g * P * _q(f, z, outer)


def laplace_i(v, z, env, outer):
    def f(y):
        pl = _pl(y, env)
        out = 0.0
        for p, a, m in ((pl, A_L, M_L), (1 - pl, A_N, M_N)):
            t = v * P * g * (H * H + y * y) ** (-a / 2) / m
            out += p * -math.expm1(-m * math.log1p(t))
        return y * out
    return math.exp(-2 * math.pi * LAM * _q(f, z, outer))


def laplace_s(v, n):
    pl = float(p_los(0, H_SUP, "sub-urban"))
    out = 0.0
    for p, a, m in ((pl, A_L, M_L), (1 - pl, A_N, M_N)):
        scale = G * P * H_SUP ** (-a)
        out += p * (1 + v * scale / m) ** (-n * m)
    return out


def c0(env):
    """E[log(1 + S / s2)] by direct integration against the Gamma density."""
    pl = p_los(0, H_SUP, env)
    out = 0
    for p, a, m in ((pl, A_L, M_L), (1 - pl, A_N, M_N)):
        scale = G * P * mp.mpf(H_SUP) ** (-a)
        k = R * m

        def f(x):
            return mp.log1p(x * scale / S2) * x ** (k - 1) * mp.exp(-m * x) * mp.mpf(m) ** k / mp.gamma(k)
        out += p * mp.quad(f, [0, 1, 5, 20, mp.inf])
    return out


def delta_r(z, env, outer):
    """int_0^inf e^{-v s2}/v (1 - L_I(v)) (1 - L_S(v)) dv in t = log v."""
    def f(t):
        v = math.exp(t)
        return math.exp(-v * S2) * (1 - laplace_i(v, z, env, outer)) * (1 - laplace_s_env(v, env))
    return integrate.quad(f, math.log(1e-16), math.log(60 / S2), epsabs=0, epsrel=1e-9,
                          limit=500)[0]


def laplace_s_env(v, env):
    pl = float(p_los(0, H_SUP, env))
    out = 0.0
    for p, a, m in ((pl, A_L, M_L), (1 - pl, A_N, M_N)):
        scale = G * P * H_SUP ** (-a)
        out += p * (1 + v * scale / m) ** (-R * m)
    return out


if __name__ == "__main__":
    e = edge()
    print("edge", mp.nstr(e, 17))
    print("sigma_bar(edge, sub-urban)", mp.nstr(sigma_bar(e, "sub-urban"), 15))
    print("sigma_bar(edge, high-rise)", mp.nstr(sigma_bar(e, "high-rise"), 15))
    zs = {}
    for env in ("sub-urban", "high-rise"):
        zs[env] = z_star(env)
        print("z_star", env, mp.nstr(zs[env], 15))
        print("rho", env, mp.nstr(rho(zs[env], env), 15))
    z = float(zs["sub-urban"])
    out = 1.5 * z
    print("E[I] window sub-urban", repr(interference_mean(z, "sub-urban", out)))
    m = interference_mean(z, "sub-urban", out)
    for c in (0.1, 1.0):
        print("L_I", c, repr(laplace_i(c / m, z, "sub-urban", out)))
    print("L_S(1e-3, n=1)", repr(laplace_s(1e-3, 1)), "L_S(1e-3, n=2)", repr(laplace_s(1e-3, 2)))
    print("C0 sub-urban", mp.nstr(c0("sub-urban"), 15))
    print("C0 high-rise", mp.nstr(c0("high-rise"), 15))
    print("delta_r window sub-urban", repr(delta_r(z, "sub-urban", out)))
