"""Summation of series weighted by the binomial coefficients of ``(1 - z)^c``.

Every series in the package has the form ``sum_n w_n(c) * phi(n)`` where
``w_n(c) = (-1)^n Gamma(c + 1) / (Gamma(c + 1 - n) n!)``.  For a
non-negative integer ``c`` the weights vanish beyond ``n = c``; otherwise
they decay like ``n^(-c-1)`` with a constant sign for ``n > c``, so plain
truncation converges only algebraically.  The head of the series is summed
exactly (compensated) and the tail is closed with the Euler-Maclaurin
formula applied to the smooth continuation of the summand.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import integrate
from scipy import special as sc

from .exceptions import SeriesDivergenceError

_INTEGER_TOL = 1e-12
_MIN_HEAD = 64


def nonneg_integer(c):
    """Return ``round(c)`` if ``c`` is a non-negative integer within tolerance, else None."""
    k = round(c)
    if k >= 0 and abs(c - k) <= _INTEGER_TOL:
        return int(k)
    return None


def binomial_weights(c, n_terms):
    """First ``n_terms`` coefficients of ``(1 - z)^c = sum_n w_n z^n``."""
    k = np.arange(1, n_terms, dtype=float)
    ratios = (k - 1.0 - c) / k
    return np.concatenate(([1.0], np.cumprod(ratios)))


def _continued_weight(c, n0, w0):
    # w(x) = w(n0) * Gamma(x - c) Gamma(n0 + 1) / (Gamma(n0 - c) Gamma(x + 1)), for x > c
    ref = sc.poch(n0 - c, c + 1.0)

    def weight(x):
        return w0 * ref / sc.poch(x - c, c + 1.0)

    return weight


def _tail(c, phi, n0, w0, abs_floor):
    """Euler-Maclaurin estimate of ``sum_{n >= n0} w(n) phi(n)``."""
    weight = _continued_weight(c, n0, w0)

    def f(x):
        return float(weight(x) * phi(np.float64(x)))

    f0 = f(n0)
    if f0 == 0.0 or not math.isfinite(f0):
        return 0.0
    h = 1.0
    fp1, fm1, fp2, fm2 = f(n0 + h), f(n0 - h), f(n0 + 2 * h), f(n0 - 2 * h)
    d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h)
    d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h**3)
    # accuracy is judged by the head-doubling agreement in binomial_series
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        integral, _ = integrate.quad(f, n0, np.inf, epsabs=abs_floor, epsrel=1e-12, limit=400)
    return math.fsum((integral, 0.5 * f0, -d1 / 12.0, d3 / 720.0))


def binomial_series(c, phi, policy):
    """Evaluate ``sum_{n >= 0} w_n(c) phi(n)`` to relative accuracy ``policy.rel_tol``.

    Parameters
    ----------
    c : float
        Exponent of the generating function ``(1 - z)^c``.
    phi : callable
        Vectorized map from (real) term indices to the non-weight factor.
        It must be smooth and eventually monotone for real ``n > c``.
    policy : SeriesPolicy
        Tolerance and term cap.

    Raises
    ------
    SeriesDivergenceError
        If two successive head lengths disagree by more than the tolerance
        once the head reaches ``policy.max_terms``.
    """
    k = nonneg_integer(c)
    if k is not None:
        n = np.arange(k + 1, dtype=float)
        return math.fsum(binomial_weights(c, k + 1) * phi(n))

    n_head = max(_MIN_HEAD, 2 * int(math.ceil(abs(c))) + 8)
    previous = None
    while True:
        n = np.arange(n_head + 1, dtype=float)
        w = binomial_weights(c, n_head + 1)
        terms = w[:-1] * phi(n[:-1])
        head = math.fsum(terms)
        scale = max(abs(head), float(np.max(np.abs(terms))))
        total = head + _tail(c, phi, n_head, w[-1], abs_floor=1e-3 * policy.rel_tol * scale)
        if not math.isfinite(total):
            raise SeriesDivergenceError("series produced a non-finite value")
        if previous is not None and abs(total - previous) <= policy.rel_tol * abs(total):
            return total
        if 2 * n_head > policy.max_terms:
            raise SeriesDivergenceError(
                f"series did not reach rel_tol={policy.rel_tol:g} within {policy.max_terms} terms"
            )
        previous = total
        n_head *= 2
