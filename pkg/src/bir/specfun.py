"""Special-function kernel.

Log-gamma, log-beta, digamma/trigamma, the complementary error function,
the regularized incomplete beta function ``I_y(a, b)`` and its inverse.

Every public function accepts Python scalars or numpy arrays (broadcast
against each other) and returns a ``float`` for scalar input.  NaN and
out-of-domain inputs raise :class:`~bir.exceptions.DomainError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sc

from .exceptions import ConvergenceError, DomainError

__all__ = [
    "SeriesPolicy",
    "log_gamma",
    "log_beta",
    "polygamma",
    "erfc",
    "reg_inc_beta",
    "reg_inc_beta_inv",
    "inc_beta_inv_series",
    "inc_beta_inv_series_coefficients",
]

_EPS = np.finfo(float).eps
_TINY = 1e-300
_CF_MAXIT = 10_000
_INV_MAXIT = 200


@dataclass(frozen=True)
class SeriesPolicy:
    """Truncation rule for every infinite series evaluated by the package.

    Attributes
    ----------
    rel_tol : float
        Relative tolerance a series value must reach, ``0 < rel_tol < 1e-3``.
    max_terms : int
        Hard cap on the number of explicitly summed terms (``>= 100``).
    """

    rel_tol: float = 1e-12
    max_terms: int = 1 << 16

    def __post_init__(self):
        if not (0.0 < self.rel_tol < 1e-3):
            raise DomainError(f"rel_tol must lie in (0, 1e-3), got {self.rel_tol!r}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 100:
            raise DomainError(f"max_terms must be an integer >= 100, got {self.max_terms!r}")


DEFAULT_POLICY = SeriesPolicy()


def _as_float_array(name, value):
    arr = np.asarray(value, dtype=float)
    if np.isnan(arr).any():
        raise DomainError(f"{name} is NaN")
    return arr


def _require_positive(name, arr):
    if np.any(arr <= 0):
        raise DomainError(f"{name} must be strictly positive, got {arr if arr.ndim == 0 else arr.min()}")


def _result(out, scalar):
    if scalar:
        return float(out)
    return out


def log_gamma(x):
    """Natural log of the gamma function for ``x > 0``."""
    arr = _as_float_array("x", x)
    _require_positive("x", arr)
    if arr.ndim == 0:
        return math.lgamma(float(arr))
    return sc.gammaln(arr)


def log_beta(a, b):
    """``ln B(a, b)``; accurate also when one argument is much larger than the other."""
    a = _as_float_array("a", a)
    b = _as_float_array("b", b)
    _require_positive("a", a)
    _require_positive("b", b)
    return _result(_betaln(a, b), a.ndim == 0 and b.ndim == 0)


_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_STIRLING = (1.0 / 12.0, -1.0 / 360.0, 1.0 / 1260.0, -1.0 / 1680.0, 1.0 / 1188.0)


def _stirling_remainder(x):
    """``ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2]``."""
    x = np.asarray(x, dtype=float)
    big = x >= 10.0
    out = np.empty(x.shape)
    if big.any():
        xb = x[big]
        inv2 = (1.0 / xb) ** 2
        acc = np.zeros_like(xb)
        for c in reversed(_STIRLING):
            acc = acc * inv2 + c
        out[big] = acc / xb
    small = ~big
    if small.any():
        xs = x[small]
        out[small] = sc.gammaln(xs) - ((xs - 0.5) * np.log(xs) - xs + _HALF_LOG_2PI)
    return out


_LARGE_SHAPE = 10.0


def _betaln(a, b):
    # With big = max(a, b) >= 10, ln Gamma(big + small) - ln Gamma(big) is
    # expanded with log1p and Stirling remainders instead of subtracting two
    # large log-gammas.
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    big = np.maximum(a, b)
    small = np.minimum(a, b)
    out = np.asarray(sc.betaln(a, b), dtype=float).copy()
    far = big >= _LARGE_SHAPE
    if np.any(far):
        bg, sm = big[far], small[far]
        total = bg + sm
        log_ratio = (
            (bg - 0.5) * np.log1p(sm / bg)
            + sm * np.log(total)
            - sm
            + _stirling_remainder(total)
            - _stirling_remainder(bg)
        )
        out[far] = sc.gammaln(sm) - log_ratio
    return out if out.ndim else float(out)


def polygamma(k, x):
    """Digamma (``k=0``) or trigamma (``k=1``) function."""
    if k not in (0, 1):
        raise DomainError(f"only polygamma orders 0 and 1 are supported, got {k!r}")
    arr = _as_float_array("x", x)
    _require_positive("x", arr)
    out = sc.digamma(arr) if k == 0 else sc.polygamma(1, arr)
    return _result(out, arr.ndim == 0)


def erfc(x):
    """Complementary error function ``2/sqrt(pi) * int_x^inf exp(-t^2) dt``."""
    arr = _as_float_array("x", x)
    return _result(sc.erfc(arr), arr.ndim == 0)


# --------------------------------------------------------------------------
# Regularized incomplete beta


def _betacf(x, a, b):
    """Continued fraction for I_x(a, b) by the modified Lentz method (vectorized)."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < _TINY, _TINY, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _CF_MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        h = np.where(active, h * d * c, h)
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(active, h * delta, h)
        active &= np.abs(delta - 1.0) > 2 * _EPS
        if not active.any():
            return h
    raise ConvergenceError("incomplete beta continued fraction did not converge")


def _log1pmx(z):
    """``log(1 + z) - z`` without cancellation near zero."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    near = np.abs(z) < 0.5
    far = ~near
    if far.any():
        out[far] = np.log1p(z[far]) - z[far]
    if near.any():
        zn = z[near]
        u = zn / (2.0 + zn)
        u2 = u * u
        acc = np.zeros_like(u)
        for k in range(23, 0, -1):  # sum_{k>=1} u^(2k) / (2k + 1)
            acc = (acc + 1.0 / (2 * k + 1)) * u2
        out[near] = 2.0 * u * acc - u * zn
    return out


def _log_beta_kernel(y, a, b):
    """``a ln y + b ln(1 - y) - ln B(a, b)``.

    Near the beta mean ``a / (a + b)`` the expression is expanded so that the
    large leading terms cancel analytically; the direct form loses about
    ``log10(a + b)`` digits there.  Away from the mean the direct form is
    used, since ``y - a / (a + b)`` no longer resolves ``y``.
    """
    s = a + b
    x0 = a / s
    w0 = b / s
    d = y - x0
    near = (np.abs(d) < 0.5 * x0) & (np.abs(d) < 0.5 * w0)
    out = np.empty(np.shape(y))
    if near.any():
        an, bn, sn, dn = a[near], b[near], s[near], d[near]
        out[near] = (
            an * _log1pmx(dn / x0[near])
            + bn * _log1pmx(-dn / w0[near])
            + 0.5 * np.log(an * bn / sn)
            - _HALF_LOG_2PI
            - _stirling_remainder(an)
            - _stirling_remainder(bn)
            + _stirling_remainder(sn)
        )
    far = ~near
    if far.any():
        out[far] = a[far] * np.log(y[far]) + b[far] * np.log1p(-y[far]) - _betaln(a[far], b[far])
    return out


def _log_reg_inc_beta(y, a, b):
    """log I_y(a, b) for float arrays already validated and broadcast."""
    y, a, b = np.broadcast_arrays(y, a, b)
    out = np.empty(y.shape)
    out[y <= 0.0] = -np.inf
    out[y >= 1.0] = 0.0
    interior = (y > 0.0) & (y < 1.0)
    if not interior.any():
        return out
    yi, ai, bi = y[interior], a[interior], b[interior]
    swap = yi > (ai + 1.0) / (ai + bi + 2.0)
    res = np.empty(yi.shape)

    direct = ~swap
    if direct.any():
        yd, ad, bd = yi[direct], ai[direct], bi[direct]
        front = _log_beta_kernel(yd, ad, bd) - np.log(ad)
        res[direct] = front + np.log(_betacf(yd, ad, bd))
    if swap.any():
        ys, as_, bs = yi[swap], ai[swap], bi[swap]
        ws = 1.0 - ys
        front = _log_beta_kernel(ws, bs, as_) - np.log(bs)
        upper = np.exp(front + np.log(_betacf(ws, bs, as_)))
        with np.errstate(divide="ignore"):
            res[swap] = np.log1p(-np.minimum(upper, 1.0))
    out[interior] = res
    return out


def _check_beta_args(y, a, b):
    y = _as_float_array("y", y)
    a = _as_float_array("a", a)
    b = _as_float_array("b", b)
    _require_positive("a", a)
    _require_positive("b", b)
    if np.any((y < 0.0) | (y > 1.0)):
        raise DomainError("incomplete beta argument must lie in [0, 1]")
    return y, a, b


def reg_inc_beta(y, a, b):
    """Regularized incomplete beta function ``I_y(a, b)``.

    The continued fraction is evaluated on whichever of ``I_y(a, b)`` and
    ``1 - I_{1-y}(b, a)`` converges faster, switching at
    ``y = (a + 1) / (a + b + 2)``.

    Parameters
    ----------
    y : float or array_like
        Upper integration limit, ``0 <= y <= 1``.
    a, b : float or array_like
        Positive shape parameters.

    Returns
    -------
    float or ndarray
        Values in ``[0, 1]``.
    """
    y, a, b = _check_beta_args(y, a, b)
    out = np.exp(_log_reg_inc_beta(y, a, b))
    return _result(np.clip(out, 0.0, 1.0), y.ndim == 0 and a.ndim == 0 and b.ndim == 0)


def _initial_inverse_guess(u, a, b):
    # Normal approximation for a, b >= 1, power-law tail approximations otherwise.
    with np.errstate(all="ignore"):
        pp = np.where(u < 0.5, u, 1.0 - u)
        t = np.sqrt(-2.0 * np.log(pp))
        z = (2.30753 + t * 0.27061) / (1.0 + t * (0.99229 + t * 0.04481)) - t
        z = np.where(u < 0.5, -z, z)
        al = (z * z - 3.0) / 6.0
        h = 2.0 / (1.0 / (2.0 * a - 1.0) + 1.0 / (2.0 * b - 1.0))
        w = z * np.sqrt(al + h) / h - (1.0 / (2.0 * b - 1.0) - 1.0 / (2.0 * a - 1.0)) * (
            al + 5.0 / 6.0 - 2.0 / (3.0 * h)
        )
        normal = a / (a + b * np.exp(2.0 * w))

        lna = np.log(a / (a + b))
        lnb = np.log(b / (a + b))
        ta = np.exp(a * lna) / a
        tb = np.exp(b * lnb) / b
        tw = ta + tb
        tail = np.where(
            u < ta / tw,
            np.exp(np.log(a * tw * u) / a),
            -np.expm1(np.log(b * tw * (1.0 - u)) / b),
        )
    guess = np.where((a >= 1.0) & (b >= 1.0), normal, tail)
    guess = np.where(np.isfinite(guess), guess, 0.5)
    return np.clip(guess, _TINY, 1.0 - _EPS)


def _inc_beta_inv_pair(u, a, b):
    """Solve I_y(a, b) = u; return ``(y, 1 - y)`` each to full relative precision.

    The equation is solved on the side whose unknown is the smaller of y and
    1 - y, so the complement stays accurate when y is close to one.
    """
    u, a, b = np.broadcast_arrays(u, a, b)
    shape = u.shape
    u, a, b = (np.array(arr, dtype=float).ravel() for arr in (u, a, b))
    y0 = _initial_inverse_guess(u, a, b)
    comp = y0 > 0.5
    p = np.where(comp, b, a)
    q = np.where(comp, a, b)
    target = np.where(comp, 1.0 - u, u)
    target_c = np.where(comp, u, 1.0 - u)
    v = np.where(comp, 1.0 - y0, y0)
    # Newton on s = ln v: ln I is close to linear in s for small v, so roots
    # such as v = 1e-96 are reached in a few steps
    s = np.log(np.clip(v, 1e-300, 1.0 - _EPS))
    lo = np.full(v.shape, -np.inf)
    hi = np.zeros(v.shape)
    lnb = _betaln(p, q)
    with np.errstate(divide="ignore"):
        log_target = np.log(target)
        log_target_c = np.log(target_c)

    active = (target > 0.0) & (target < 1.0)
    for _ in range(_INV_MAXIT):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        si, pi, qi = s[idx], p[idx], q[idx]
        with np.errstate(all="ignore"):
            vi = np.exp(si)
            log_i = _log_reg_inc_beta(vi, pi, qi)
            log_dens = (pi - 1.0) * si + (qi - 1.0) * np.log1p(-vi) - lnb[idx]
            # Matching ln I resolves s to about eps I / (v f); matching
            # ln(1 - I) = ln I_{1-v}(q, p) to about eps (1 - I + f) / (v f),
            # the extra term from rounding 1 - v.  Take the sharper one.
            i_val = np.exp(log_i)
            up = (1.0 - i_val) + np.exp(log_dens) < i_val
            log_tail = log_i.copy()
            if up.any():
                log_tail[up] = _log_reg_inc_beta(1.0 - vi[up], qi[up], pi[up])
            # both residuals increase with s
            f = np.where(up, log_target_c[idx] - log_tail, log_i - log_target[idx])
            lo_i = np.where(f < 0.0, si, lo[idx])
            hi_i = np.where(f > 0.0, si, hi[idx])
            slope = np.exp(si + log_dens - log_tail)
            sn = si - f / slope
        bad = ~np.isfinite(sn) | (sn <= lo_i) | (sn >= hi_i)
        fallback = np.where(np.isfinite(lo_i), 0.5 * (lo_i + hi_i), hi_i - np.maximum(1.0, np.abs(hi_i)))
        sn = np.where(bad, fallback, sn)
        tol = 2 * _EPS * np.maximum(1.0, np.abs(si))
        finished = (f == 0.0) | (np.abs(sn - si) <= 2 * _EPS) | (hi_i - lo_i <= tol)
        s[idx] = np.where(f == 0.0, si, sn)
        lo[idx] = lo_i
        hi[idx] = hi_i
        active[idx] = ~finished
    if active.any():
        raise ConvergenceError(
            f"inverse incomplete beta did not converge in {_INV_MAXIT} iterations"
        )
    v = np.exp(s)
    v = np.where(target <= 0.0, 0.0, v)
    v = np.where(target >= 1.0, 1.0, v)
    y = np.where(comp, 1.0 - v, v)
    w = np.where(comp, v, 1.0 - v)
    return y.reshape(shape), w.reshape(shape)


def reg_inc_beta_inv(u, a, b):
    """Inverse of the regularized incomplete beta function in its first argument.

    Safeguarded Newton iteration in ``ln y`` (or ``ln(1 - y)``) seeded by a
    normal or power-law tail approximation; steps leaving the current bracket
    fall back to bisection.  Roots closer to one than the spacing of doubles
    round to 1.0.

    Raises
    ------
    DomainError
        If ``u`` is outside ``[0, 1]`` or a shape parameter is not positive.
    ConvergenceError
        If 200 iterations do not suffice.
    """
    u, a, b = _check_beta_args(u, a, b)
    y, _ = _inc_beta_inv_pair(u, a, b)
    return _result(y, u.ndim == 0 and a.ndim == 0 and b.ndim == 0)


def inc_beta_inv_series_coefficients(a, b, n_terms):
    """Coefficients ``q_1..q_n`` of the power series of the inverse incomplete beta.

    ``I_u^{-1}(a, b) = sum_i q_i [a B(a, b) u]^(i/a)`` with ``q_1 = 1``; the
    remaining coefficients come from a cubic convolution recursion.
    """
    if n_terms < 1:
        raise DomainError("n_terms must be a positive integer")
    a = float(a)
    b = float(b)
    if not (a > 0 and b > 0):
        raise DomainError("shape parameters must be positive")
    q = [0.0, 1.0]  # 1-based
    for i in range(2, n_terms + 1):
        quad = 0.0
        if i != 2:
            quad = math.fsum(
                q[r] * q[i + 1 - r] * (r * (1.0 - a) * (i - r) - r * (r - 1.0)) for r in range(2, i)
            )
        cubic = math.fsum(
            q[r] * q[s] * q[i + 1 - r - s] * (r * (r - a) + s * (a + b - 2.0) * (i + 1 - r - s))
            for r in range(1, i)
            for s in range(1, i - r + 1)
        )
        q.append((quad + cubic) / (i * i + (a - 2.0) * i + (1.0 - a)))
    return np.array(q[1:])


def inc_beta_inv_series(u, a, b, n_terms=12):
    """Truncated power series for ``I_u^{-1}(a, b)``, useful for small ``u``.

    This is a validation path only; its radius of convergence depends on
    ``(a, b)`` and has to be checked against :func:`reg_inc_beta_inv`.
    """
    if not (0.0 < u < 1.0):
        raise DomainError(f"u must lie in (0, 1), got {u!r}")
    q = inc_beta_inv_series_coefficients(a, b, n_terms)
    z = math.exp((math.log(a) + _betaln(a, b) + math.log(u)) / a)
    powers = z ** np.arange(1, n_terms + 1)
    return math.fsum(q * powers)
