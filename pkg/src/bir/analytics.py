"""Moments, mode, quantile shape, mean deviations, entropies and order statistics.

Series results are evaluated by :func:`bir._series.binomial_series`.  The
``*_quad`` helpers compute the same quantities by adaptive quadrature after
the substitution ``u = theta / x^2``; they serve as independent checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize
from scipy import special as sc

from . import _series
from .distributions import (
    bir_cdf,
    bir_logcdf,
    bir_logpdf,
    bir_logsf,
    bir_quantile,
)
from .exceptions import BracketError, DomainError, MomentNonexistenceError
from .specfun import DEFAULT_POLICY, SeriesPolicy, _betaln

__all__ = [
    "QuantileShape",
    "MeanDeviations",
    "InequalityCurves",
    "EntropyCheck",
    "FormulaDiscrepancyWarning",
    "s_r",
    "moment",
    "mode",
    "quantile_shape",
    "partial_expectation",
    "mean_deviations",
    "inequality_curves",
    "shannon_entropy",
    "shannon_entropy_check",
    "renyi_entropy",
    "order_stat_pdf",
    "integrate_positive",
    "expectation_quad",
    "shannon_entropy_quad",
    "renyi_integral_quad",
]

EULER_GAMMA = 0.57721566490153286061


class FormulaDiscrepancyWarning(UserWarning):
    """A closed-form series disagrees with its quadrature check."""


@dataclass(frozen=True)
class QuantileShape:
    bowley: float
    moors: float


@dataclass(frozen=True)
class MeanDeviations:
    delta1: float  # about the mean
    delta2: float  # about the median


@dataclass(frozen=True)
class InequalityCurves:
    bonferroni: float
    lorenz: float


@dataclass(frozen=True)
class EntropyCheck:
    series: float
    quadrature: float

    @property
    def rel_diff(self):
        return abs(self.series - self.quadrature) / max(abs(self.quadrature), 1e-300)


# --------------------------------------------------------------------------
# Quadrature


def integrate_positive(func, theta, *, epsabs=1e-13, epsrel=1e-12):
    """``int_0^inf func(x) dx`` via ``x = sqrt(theta / u)``.

    The substitution maps the essential singularity at the origin to
    exponential decay in ``u`` and the algebraic right tail to an integrable
    endpoint singularity at ``u = 0``.
    """
    root = math.sqrt(theta)

    def integrand(u):
        if u <= 0.0:
            return 0.0
        return func(root / math.sqrt(u)) * 0.5 * root * u**-1.5

    total = 0.0
    for lo, hi in ((0.0, 0.01), (0.01, 1.0), (1.0, 10.0), (10.0, np.inf)):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=epsabs, epsrel=epsrel, limit=500)
        total += val
    return total


def expectation_quad(p, g):
    """``E[g(X)]`` by quadrature of ``g * bir_pdf``."""

    def integrand(x):
        lf = bir_logpdf(p, x)
        return 0.0 if lf == -np.inf else g(x) * math.exp(lf)

    return integrate_positive(integrand, p.theta)


def shannon_entropy_quad(p):
    """``-int f log f`` by quadrature."""

    def integrand(x):
        lf = bir_logpdf(p, x)
        return 0.0 if lf == -np.inf else -lf * math.exp(lf)

    return integrate_positive(integrand, p.theta)


def renyi_integral_quad(p, alpha):
    """``int f^alpha`` by quadrature."""
    return integrate_positive(lambda x: math.exp(alpha * bir_logpdf(p, x)), p.theta)


# --------------------------------------------------------------------------
# Moments


def _check_moment_order(b, r):
    if r >= 2.0:
        raise MomentNonexistenceError(
            f"moment of order r={r:g} does not exist: the series representation requires r < 2"
        )
    if r >= 2.0 * b:
        raise MomentNonexistenceError(
            f"moment of order r={r:g} does not exist: the right tail decays like x^(-2b) "
            f"with 2b={2 * b:g}"
        )


def s_r(a, b, r, policy: SeriesPolicy = DEFAULT_POLICY):
    """Moment kernel ``S_r(a, b) = int_0^inf y^(-r/2) e^(-a y) (1 - e^(-y))^(b-1) dy``.

    Evaluated as ``Gamma(1 - r/2) * sum_n w_n (a + n)^(r/2 - 1)`` with ``w_n``
    the coefficients of ``(1 - z)^(b-1)``; a finite sum for integer ``b``.

    Raises
    ------
    MomentNonexistenceError
        For ``r >= 2``, and for ``r >= 2b`` where the integral diverges.
    """
    if not (a > 0 and b > 0):
        raise DomainError("shape parameters must be positive")
    _check_moment_order(b, r)
    power = 1.0 - 0.5 * r
    total = _series.binomial_series(b - 1.0, lambda n: (a + n) ** -power, policy)
    return math.gamma(power) * total


def moment(p, r, policy: SeriesPolicy = DEFAULT_POLICY):
    """``E(X^r) = theta^(r/2) S_r(a, b) / B(a, b)``; negative ``r`` allowed."""
    kernel = s_r(p.a, p.b, r, policy)
    return math.exp(0.5 * r * math.log(p.theta) - _betaln(p.a, p.b) + math.log(kernel))


# --------------------------------------------------------------------------
# Mode


def _mode_bracket_term(a, b):
    def g(y):
        # 1/(e^y - 1) written to stay finite for large y
        return 4.0 * a - 6.0 / y + 4.0 * (b - 1.0) * math.exp(-y) / math.expm1(-y)

    return g


def mode(p):
    """Location of the unique mode, ``sqrt(theta / y0)``.

    ``y0`` is the root of ``4a - 6/y + 4(b-1)/(1 - e^y)``, an increasing
    function of ``y`` that runs from ``-inf`` to ``4a``.
    """
    g = _mode_bracket_term(p.a, p.b)
    lo, hi = 1.0 / (p.a + 1.0), 1.0
    for _ in range(2000):
        if g(lo) < 0.0:
            break
        lo *= 0.5
    else:
        raise BracketError("could not bracket the mode from below")
    for _ in range(2000):
        if g(hi) > 0.0:
            break
        hi *= 2.0
    else:
        raise BracketError("could not bracket the mode from above")
    y0 = optimize.brentq(g, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return math.sqrt(p.theta / y0)


# --------------------------------------------------------------------------
# Quantile-based shape


def quantile_shape(p):
    """Bowley skewness and Moors kurtosis from quartiles and octiles."""
    q = bir_quantile(p, np.arange(1, 8) / 8.0)
    q1, q2, q3, q4, q5, q6, q7 = q
    bowley = (q6 - 2.0 * q4 + q2) / (q6 - q2)
    moors = (q7 - q5 - q3 + q1) / (q6 - q2)
    return QuantileShape(float(bowley), float(moors))


# --------------------------------------------------------------------------
# Partial expectation, deviations, inequality curves


def partial_expectation(p, z, policy: SeriesPolicy = DEFAULT_POLICY):
    """``J(z) = int_0^z x f(x) dx`` from its complementary-error-function series."""
    if not z > 0:
        raise DomainError(f"z must be positive, got {z!r}")
    if math.isinf(z):
        return moment(p, 1.0, policy)
    t = p.theta / z**2

    def phi(n):
        s = np.sqrt(t * (p.a + n))
        return sc.erfcx(s) * np.exp(-t * n) / np.sqrt(p.a + n)

    total = _series.binomial_series(p.b - 1.0, phi, policy)
    if total <= 0.0:
        return 0.0
    return math.exp(
        0.5 * math.log(math.pi * p.theta) - p.a * t - _betaln(p.a, p.b) + math.log(total)
    )


def mean_deviations(p, policy: SeriesPolicy = DEFAULT_POLICY):
    """Mean absolute deviations about the mean (``delta1``) and the median (``delta2``)."""
    mu = moment(p, 1.0, policy)
    median = float(bir_quantile(p, 0.5))
    delta1 = 2.0 * mu * bir_cdf(p, mu) - 2.0 * partial_expectation(p, mu, policy)
    delta2 = mu - 2.0 * partial_expectation(p, median, policy)
    return MeanDeviations(delta1, delta2)


def inequality_curves(p, prob, policy: SeriesPolicy = DEFAULT_POLICY):
    """Bonferroni and Lorenz curves at probability ``prob`` in ``(0, 1]``."""
    if not (0.0 < prob <= 1.0):
        raise DomainError(f"prob must lie in (0, 1], got {prob!r}")
    mu = moment(p, 1.0, policy)
    if prob == 1.0:
        return InequalityCurves(1.0, 1.0)
    lorenz = partial_expectation(p, float(bir_quantile(p, prob)), policy) / mu
    return InequalityCurves(lorenz / prob, lorenz)


# --------------------------------------------------------------------------
# Entropies


def shannon_entropy(p, policy: SeriesPolicy = DEFAULT_POLICY):
    """Shannon entropy from its single-sum series.

    The inner sum ``sum_k 1/(k (a+k+n))`` is taken in closed form as
    ``(psi(a+n+1) + gamma) / (a+n)``.
    """
    a, b, theta = p.a, p.b, p.theta

    def phi(n):
        c = a + n
        bracket = 1.5 * (np.log(c * theta) + EULER_GAMMA) / c + a / c**2
        if b != 1.0:
            bracket = bracket + (b - 1.0) * (sc.digamma(c + 1.0) + EULER_GAMMA) / c
        return bracket

    total = _series.binomial_series(b - 1.0, phi, policy)
    lnb = _betaln(a, b)
    return -(math.log(2.0 * theta) - lnb) + math.exp(-lnb) * total


def shannon_entropy_check(p, policy: SeriesPolicy = DEFAULT_POLICY, rel_tol=1e-6):
    """Compare the series entropy with quadrature; warn when they disagree.

    The quadrature value is the authoritative one if a
    :class:`FormulaDiscrepancyWarning` is issued.
    """
    check = EntropyCheck(shannon_entropy(p, policy), shannon_entropy_quad(p))
    if check.rel_diff > rel_tol:
        warnings.warn(
            f"Shannon series {check.series!r} differs from quadrature {check.quadrature!r} "
            f"(relative {check.rel_diff:.2e})",
            FormulaDiscrepancyWarning,
            stacklevel=2,
        )
    return check


def _renyi_log_integral(p, alpha, policy):
    a, b, theta = p.a, p.b, p.theta
    k = 0.5 * (3.0 * alpha - 1.0)
    total = _series.binomial_series(alpha * (b - 1.0), lambda n: (a * alpha + n) ** -k, policy)
    return (
        alpha * (math.log(2.0 * theta) - _betaln(a, b))
        + math.lgamma(k)
        - math.log(2.0)
        - k * math.log(theta)
        + math.log(total)
    )


def renyi_entropy(p, alpha, policy: SeriesPolicy = DEFAULT_POLICY):
    """Renyi entropy ``log(int f^alpha) / (1 - alpha)``.

    Requires ``alpha > 1/3`` and ``alpha != 1``; additionally
    ``alpha > 1/(2b + 1)``, below which ``int f^alpha`` diverges.
    """
    if not alpha > 1.0 / 3.0 or alpha == 1.0:
        raise DomainError(f"alpha must exceed 1/3 and differ from 1, got {alpha!r}")
    if alpha * (2.0 * p.b + 1.0) <= 1.0:
        raise DomainError(
            f"int f^alpha diverges for alpha <= 1/(2b+1) = {1.0 / (2.0 * p.b + 1.0):g}"
        )
    return _renyi_log_integral(p, alpha, policy) / (1.0 - alpha)


# --------------------------------------------------------------------------
# Order statistics


def order_stat_pdf(p, i, n, x):
    """Density of the ``i``-th order statistic in a sample of size ``n``."""
    if isinstance(i, bool) or isinstance(n, bool) or int(i) != i or int(n) != n or not 1 <= i <= n:
        raise DomainError(f"order statistic indices must satisfy 1 <= i <= n, got i={i!r}, n={n!r}")
    i, n = int(i), int(n)
    log_f = np.asarray(bir_logpdf(p, x))
    out = log_f - _betaln(i, n - i + 1)
    if i > 1:
        out = out + (i - 1) * np.asarray(bir_logcdf(p, x))
    if n > i:
        out = out + (n - i) * np.asarray(bir_logsf(p, x))
    res = np.exp(out)
    return float(res) if np.ndim(x) == 0 else res
