"""Quadrature, root finding and the regularized incomplete gamma function.

Every integral in the package runs over ``[z, inf)`` with a smooth integrand
that eventually decays like a power law (or faster).  The semi-infinite
integrator walks outwards over panels of doubling width, integrates each panel
with adaptive Gauss-Kronrod (7/15) and, once the panel contributions settle
into a geometric sequence, sums the remaining tail in closed form.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize


class NumericsError(RuntimeError):
    pass


class NonConvergent(NumericsError):
    """A quadrature or iteration cap was hit.

    ``value`` and ``error`` hold the partial result at the point of failure.
    """

    def __init__(self, message, value=float("nan"), error=float("inf")):
        super().__init__(message)
        self.value = value
        self.error = error


class NoBracket(NumericsError):
    pass


@dataclass(frozen=True)
class NumericsConfig:
    quad_rel_tol: float = 1e-9
    quad_abs_tol: float = 1e-300
    root_tol: float = 1e-10
    max_subdivisions: int = 400
    max_root_iterations: int = 200
    tail_rel_tol: float = 1e-10
    max_doublings: int = 160

    def __post_init__(self):
        for name in ("quad_rel_tol", "quad_abs_tol", "root_tol", "tail_rel_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("max_subdivisions", "max_root_iterations", "max_doublings"):
            if getattr(self, name) < 50:
                raise ValueError(f"{name} must be at least 50")


DEFAULT_NUMERICS = NumericsConfig()


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float

    def __float__(self):
        return self.value


# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15).
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KWEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5, 7 from the edge).
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[[1, 3, 5]] = _WG[:3]
_GWEIGHTS[[9, 11, 13]] = _WG[2::-1]
_GWEIGHTS[7] = _WG[3]


def _gk15(f, a, b):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    fx = np.asarray(f(c + h * _NODES), dtype=float)
    if fx.shape != (15,):
        fx = np.broadcast_to(fx, (15,))
    k = h * float(_KWEIGHTS @ fx)
    g = h * float(_GWEIGHTS @ fx)
    return k, abs(k - g)


def integrate_interval(f, a, b, rel_tol=1e-9, abs_tol=1e-300, max_subdivisions=400):
    """Adaptive Gauss-Kronrod quadrature of a vectorized ``f`` over ``[a, b]``.

    The interval with the largest error estimate is bisected until the summed
    error drops below ``max(abs_tol, rel_tol * |value|)``.
    """
    if a == b:
        return QuadResult(0.0, 0.0)
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val)]
    total, total_err = val, err
    n = 1
    while total_err > max(abs_tol, rel_tol * abs(total)):
        if n >= max_subdivisions:
            raise NonConvergent(
                f"subdivision cap ({max_subdivisions}) hit on [{a}, {b}]",
                total, total_err)
        neg_err, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            # interval exhausted in floating point; accept what we have
            total_err += neg_err
            heapq.heappush(heap, (0.0, lo, hi, v))
            break
        v1, e1 = _gk15(f, lo, mid)
        v2, e2 = _gk15(f, mid, hi)
        total += v1 + v2 - v
        total_err += e1 + e2 + neg_err
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        n += 1
    # recompute from the leaves to shed accumulated rounding in the running sums
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    return QuadResult(total, total_err)


def integrate_semi_infinite(f, a, cfg=DEFAULT_NUMERICS, width=None):
    """Integrate a vectorized ``f`` over ``[a, inf)``.

    Panels are ``[a, a+w], [a+w, a+2w], [a+2w, a+4w], ...``.  The walk stops
    when the newest panel is negligible against the running total, or when
    the panel values shrink geometrically (power-law tails) so that the rest
    can be summed as a geometric series.  ``width`` defaults to ``max(|a|, 1)``.
    """
    w = float(width) if width is not None else max(abs(a), 1.0)
    panel_tol = 0.25 * cfg.quad_rel_tol
    lo, hi = a, a + w
    panels = []
    total = 0.0
    err = 0.0
    prev_extrap = None
    for _ in range(cfg.max_doublings):
        try:
            res = integrate_interval(f, lo, hi, panel_tol, cfg.quad_abs_tol,
                                     cfg.max_subdivisions)
        except NonConvergent as exc:
            raise NonConvergent(str(exc), total + exc.value, err + exc.error) from None
        panels.append(res.value)
        total += res.value
        err += res.error
        lo, hi = hi, a + 2.0 * (hi - a)

        scale = max(abs(total), cfg.quad_abs_tol)
        if len(panels) >= 2 and max(abs(panels[-1]), abs(panels[-2])) <= cfg.tail_rel_tol * scale:
            return _checked(total, err + abs(panels[-1]), cfg)
        if len(panels) >= 3:
            q1 = panels[-1] / panels[-2] if panels[-2] != 0 else math.nan
            q0 = panels[-2] / panels[-3] if panels[-3] != 0 else math.nan
            if 0.0 < q1 < 1.0 and 0.0 < q0 < 1.0:
                extrap = total + panels[-1] * q1 / (1.0 - q1)
                if prev_extrap is not None and \
                        abs(extrap - prev_extrap) <= cfg.tail_rel_tol * abs(extrap):
                    return _checked(extrap, err + abs(extrap - prev_extrap), cfg)
                prev_extrap = extrap
            else:
                prev_extrap = None
    raise NonConvergent(
        f"tail did not settle after {cfg.max_doublings} doublings "
        f"(integrand may not be integrable)", total, math.inf)


def _checked(value, err, cfg):
    if not err <= cfg.quad_rel_tol * abs(value) + cfg.quad_abs_tol:
        raise NonConvergent(f"error estimate {err:.3e} exceeds tolerance for value {value:.6e}",
                            value, err)
    return QuadResult(value, err)


def find_root_decreasing(f, lo, hi, cfg=DEFAULT_NUMERICS):
    """Root of a monotone decreasing ``f`` between ``lo`` and ``hi``.

    ``hi`` is doubled (at most ``max_root_iterations`` times) until ``f(hi) < 0``.
    Raises :class:`NoBracket` if ``f(lo) <= 0`` or the expansion never changes
    sign.  The bracketed solve is Brent's method (bisection safeguarded
    inverse-quadratic/secant steps).
    """
    flo = f(lo)
    if not flo > 0:
        raise NoBracket(f"f(lo={lo}) = {flo} is not positive")
    fhi = f(hi)
    n = 0
    while fhi > 0:
        if fhi > flo:
            raise NoBracket("f increases on the bracket; expected a decreasing function")
        if n >= cfg.max_root_iterations:
            raise NoBracket(f"no sign change up to hi={hi}")
        lo, flo = hi, fhi
        hi = 2.0 * hi if hi > 0 else hi + 1.0
        fhi = f(hi)
        n += 1
    if fhi == 0:
        return hi
    try:
        x, info = optimize.brentq(f, lo, hi, xtol=1e-300, rtol=max(cfg.root_tol, 4e-16),
                                  maxiter=cfg.max_root_iterations, full_output=True,
                                  disp=False)
    except ValueError as exc:
        raise NoBracket(str(exc)) from None
    if not info.converged:
        raise NonConvergent(f"root finder stopped after {info.iterations} iterations", x)
    return x


# --- regularized upper incomplete gamma ---------------------------------------

_GAMMA_EPS = 4 * np.finfo(float).eps
_GAMMA_MAXITER = 10000
_TINY = 1e-300


def regularized_gamma_upper(shape, x):
    """Q(shape, x) = Gamma(shape, x) / Gamma(shape).

    Power series for ``x < shape + 1`` and a modified-Lentz continued fraction
    otherwise.  Vectorized over ``x`` (and ``shape``).
    """
    a = np.asarray(shape, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(~(a > 0)):
        raise ValueError("shape must be positive")
    if np.any(x < 0):
        raise ValueError("x must be nonnegative")
    a, x = np.broadcast_arrays(a, x)
    out = np.empty(a.shape)
    use_series = x < a + 1.0
    if np.any(use_series):
        out[use_series] = 1.0 - _lower_series(a[use_series], x[use_series])
    cf = ~use_series
    if np.any(cf):
        # the fraction is below 1 there, so a prefactor past exp(-760) means Q is 0
        negligible = np.zeros(a.shape, dtype=bool)
        negligible[cf] = _log_prefactor(a[cf], x[cf]) < -760.0
        out[negligible] = 0.0
        cf &= ~negligible
        if np.any(cf):
            out[cf] = _upper_cf(a[cf], x[cf])
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def _log_prefactor(a, x):
    # log(x^a e^-x / Gamma(a)); x == 0 handled by the caller
    from scipy.special import gammaln
    with np.errstate(divide="ignore"):
        return a * np.log(x) - x - gammaln(a)


def _lower_series(a, x):
    # P(a, x) = x^a e^-x / Gamma(a+1) * sum_n x^n / ((a+1)...(a+n))
    term = np.ones_like(x)
    total = np.ones_like(x)
    ap = a.copy()
    active = np.ones(x.shape, dtype=bool)
    for _ in range(_GAMMA_MAXITER):
        ap = ap + 1.0
        term = np.where(active, term * x / ap, term)
        total = np.where(active, total + term, total)
        active &= np.abs(term) > np.abs(total) * _GAMMA_EPS
        if not active.any():
            break
    else:
        raise NonConvergent("incomplete gamma series did not converge")
    logp = _log_prefactor(a, x) - np.log(a) + np.log(total)
    return np.where(x == 0, 0.0, np.exp(logp))


def _upper_cf(a, x):
    # Legendre continued fraction, evaluated with modified Lentz
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _GAMMA_MAXITER):
        an = -i * (i - a)
        b = b + 2.0
        d_new = an * d + b
        d_new = np.where(np.abs(d_new) < _TINY, _TINY, d_new)
        c_new = b + an / c
        c_new = np.where(np.abs(c_new) < _TINY, _TINY, c_new)
        d_new = 1.0 / d_new
        delta = d_new * c_new
        d = np.where(active, d_new, d)
        c = np.where(active, c_new, c)
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > _GAMMA_EPS
        if not active.any():
            break
    else:
        raise NonConvergent("incomplete gamma continued fraction did not converge")
    return np.exp(_log_prefactor(a, x) + np.log(h))
