"""The beta inverse Rayleigh (BIR) distribution and four comparator lifetime models.

``X ~ BIR(a, b, theta)`` has cdf ``F(x) = I_{G(x)}(a, b)`` where
``G(x) = exp(-theta / x^2)`` is the inverse Rayleigh cdf.  Densities are
computed in log space throughout: the density normalizer ``1 / B(a, b)``
overflows for the large ``a`` that arise in practice.

Comparator families (all with parameters strictly positive):

=========  ====================  =====================================
family     parameters            cdf
=========  ====================  =====================================
IR         theta                 exp(-theta / x^2)
EIR        alpha, theta          exp(-theta / x^2) ** alpha
Rayleigh   sigma                 1 - exp(-x^2 / (2 sigma^2))
GR         alpha, lam            (1 - exp(-(lam x)^2)) ** alpha
=========  ====================  =====================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import ClassVar, Union

import numpy as np
from scipy import special as sc

from . import _series
from .exceptions import DomainError
from .specfun import (
    DEFAULT_POLICY,
    SeriesPolicy,
    _betaln,
    _inc_beta_inv_pair,
    _log_reg_inc_beta,
)

__all__ = [
    "BirParams",
    "IRParams",
    "EIRParams",
    "RayleighParams",
    "GRParams",
    "FamilyParams",
    "RngSpec",
    "FAMILIES",
    "bir_logpdf",
    "bir_pdf",
    "bir_cdf",
    "bir_logcdf",
    "bir_cdf_series",
    "bir_quantile",
    "bir_sample",
    "bir_survival",
    "bir_logsf",
    "bir_hazard",
    "family_logpdf",
    "family_params",
]


def _positive_x(x):
    arr = np.asarray(x, dtype=float)
    bad = ~(arr > 0.0)  # catches NaN as well
    if bad.any():
        offending = arr if arr.ndim == 0 else arr[bad][0]
        raise DomainError(f"x must be strictly positive, got {float(offending)!r}")
    return arr


def _out(values, x):
    return float(values) if np.ndim(x) == 0 else values


class _Family:
    """Shared behaviour of the parameter records."""

    family: ClassVar[str]
    names: ClassVar[tuple]

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float, np.floating, np.integer)) and math.isfinite(value) and value > 0):
                raise DomainError(f"{type(self).__name__}.{f.name} must be finite and > 0, got {value!r}")
            object.__setattr__(self, f.name, float(value))

    @property
    def values(self):
        return tuple(getattr(self, name) for name in self.names)

    @property
    def n_params(self):
        return len(self.names)

    @classmethod
    def from_values(cls, values):
        return cls(*values)

    def pdf(self, x):
        return np.exp(self.logpdf(x)) if np.ndim(x) else math.exp(self.logpdf(x))

    def hazard(self, x):
        h = np.exp(np.asarray(self.logpdf(x)) - np.log(np.asarray(self.sf(x), dtype=float)))
        return _out(h, x)


@dataclass(frozen=True)
class BirParams(_Family):
    """Parameters ``(a, b, theta)`` of the BIR distribution; ``theta`` has units of x^2."""

    a: float
    b: float
    theta: float

    family: ClassVar[str] = "bir"
    names: ClassVar[tuple] = ("a", "b", "theta")

    def logpdf(self, x):
        return bir_logpdf(self, x)

    def cdf(self, x):
        return bir_cdf(self, x)

    def sf(self, x):
        return bir_survival(self, x)

    def quantile(self, u):
        return bir_quantile(self, u)

    def hazard(self, x):
        return bir_hazard(self, x)


@dataclass(frozen=True)
class IRParams(_Family):
    """Inverse Rayleigh, cdf ``exp(-theta / x^2)``."""

    theta: float

    family: ClassVar[str] = "ir"
    names: ClassVar[tuple] = ("theta",)

    def logpdf(self, x):
        x = _positive_x(x)
        return _out(math.log(2.0 * self.theta) - 3.0 * np.log(x) - self.theta / x**2, x)

    def cdf(self, x):
        x = _positive_x(x)
        return _out(np.exp(-self.theta / x**2), x)

    def sf(self, x):
        x = _positive_x(x)
        return _out(-np.expm1(-self.theta / x**2), x)

    def quantile(self, u):
        u = _open_unit(u)
        return _out(np.sqrt(self.theta / -np.log(u)), u)


@dataclass(frozen=True)
class EIRParams(_Family):
    """Exponentiated inverse Rayleigh, cdf ``exp(-theta / x^2) ** alpha``.

    Only the product ``alpha * theta`` is identifiable.
    """

    alpha: float
    theta: float

    family: ClassVar[str] = "eir"
    names: ClassVar[tuple] = ("alpha", "theta")

    def logpdf(self, x):
        x = _positive_x(x)
        scale = self.alpha * self.theta
        return _out(math.log(2.0 * scale) - 3.0 * np.log(x) - scale / x**2, x)

    def cdf(self, x):
        return IRParams(self.alpha * self.theta).cdf(x)

    def sf(self, x):
        return IRParams(self.alpha * self.theta).sf(x)

    def quantile(self, u):
        return IRParams(self.alpha * self.theta).quantile(u)


@dataclass(frozen=True)
class RayleighParams(_Family):
    """Rayleigh with scale ``sigma``: density ``x / sigma^2 * exp(-x^2 / (2 sigma^2))``."""

    sigma: float

    family: ClassVar[str] = "rayleigh"
    names: ClassVar[tuple] = ("sigma",)

    def logpdf(self, x):
        x = _positive_x(x)
        return _out(np.log(x) - 2.0 * math.log(self.sigma) - x**2 / (2.0 * self.sigma**2), x)

    def cdf(self, x):
        x = _positive_x(x)
        return _out(-np.expm1(-(x**2) / (2.0 * self.sigma**2)), x)

    def sf(self, x):
        x = _positive_x(x)
        return _out(np.exp(-(x**2) / (2.0 * self.sigma**2)), x)

    def quantile(self, u):
        u = _open_unit(u)
        return _out(self.sigma * np.sqrt(-2.0 * np.log1p(-u)), u)


@dataclass(frozen=True)
class GRParams(_Family):
    """Generalized Rayleigh (Burr type X), cdf ``(1 - exp(-(lam x)^2)) ** alpha``."""

    alpha: float
    lam: float

    family: ClassVar[str] = "gr"
    names: ClassVar[tuple] = ("alpha", "lam")

    def logpdf(self, x):
        x = _positive_x(x)
        z = (self.lam * x) ** 2
        with np.errstate(divide="ignore"):
            out = (
                math.log(2.0 * self.alpha)
                + 2.0 * math.log(self.lam)
                + np.log(x)
                - z
                + (self.alpha - 1.0) * np.log(-np.expm1(-z))
            )
        return _out(out, x)

    def cdf(self, x):
        x = _positive_x(x)
        return _out(np.exp(self.alpha * np.log(-np.expm1(-((self.lam * x) ** 2)))), x)

    def sf(self, x):
        x = _positive_x(x)
        return _out(-np.expm1(self.alpha * np.log(-np.expm1(-((self.lam * x) ** 2)))), x)

    def quantile(self, u):
        u = _open_unit(u)
        return _out(np.sqrt(-np.log(-np.expm1(np.log(u) / self.alpha))) / self.lam, u)


FamilyParams = Union[BirParams, IRParams, EIRParams, RayleighParams, GRParams]

FAMILIES = {
    cls.family: cls for cls in (BirParams, EIRParams, IRParams, RayleighParams, GRParams)
}


def family_params(family, values):
    """Build the parameter record of ``family`` (a tag such as ``"gr"``) from a value tuple."""
    try:
        cls = FAMILIES[family]
    except KeyError:
        raise DomainError(f"unknown family {family!r}; expected one of {sorted(FAMILIES)}") from None
    return cls.from_values(values)


def family_logpdf(fp, x):
    """Log density of ``x`` under any of the five families."""
    return fp.logpdf(x)


# --------------------------------------------------------------------------
# BIR proper


def _open_unit(u):
    arr = np.asarray(u, dtype=float)
    bad = ~((arr > 0.0) & (arr < 1.0))
    if bad.any():
        offending = arr if arr.ndim == 0 else arr[bad][0]
        raise DomainError(f"quantile is undefined at u={float(offending)!r}; need 0 < u < 1")
    return arr


def _ratio(p, x):
    return p.theta / x**2


def bir_logpdf(p, x):
    """Log of the BIR density."""
    x = _positive_x(x)
    with np.errstate(over="ignore", divide="ignore"):
        t = _ratio(p, x)
        out = (
            math.log(2.0 * p.theta)
            - _betaln(p.a, p.b)
            - 3.0 * np.log(x)
            - p.a * t
        )
        if p.b != 1.0:
            out = out + (p.b - 1.0) * np.log(-np.expm1(-t))
    out = np.where(np.isinf(t), -np.inf, out)
    return _out(out, x)


def bir_pdf(p, x):
    """BIR density ``2 theta / (B(a,b) x^3) exp(-a theta/x^2) [1 - exp(-theta/x^2)]^(b-1)``."""
    return _out(np.exp(bir_logpdf(p, x)), x)


def bir_logcdf(p, x):
    x = _positive_x(x)
    with np.errstate(over="ignore"):
        y = np.exp(-_ratio(p, x))
    return _out(_log_reg_inc_beta(y, p.a, p.b), x)


def bir_cdf(p, x):
    """BIR cdf ``I_{exp(-theta/x^2)}(a, b)``.

    For ``a = b = 1/2`` the closed form ``(2/pi) arcsin(exp(-theta / (2 x^2)))``
    is used instead of the continued fraction.
    """
    x = _positive_x(x)
    if p.a == 0.5 and p.b == 0.5:
        with np.errstate(over="ignore"):
            out = (2.0 / math.pi) * np.arcsin(np.exp(-0.5 * _ratio(p, x)))
        return _out(out, x)
    return _out(np.exp(bir_logcdf(p, x)), x)


def bir_logsf(p, x):
    x = _positive_x(x)
    with np.errstate(over="ignore"):
        w = -np.expm1(-_ratio(p, x))
    return _out(_log_reg_inc_beta(w, p.b, p.a), x)


def bir_survival(p, x):
    """Survival ``1 - F(x) = I_{1 - exp(-theta/x^2)}(b, a)``, evaluated on the (b, a) side."""
    return _out(np.exp(bir_logsf(p, x)), x)


def bir_hazard(p, x):
    """Hazard rate ``f(x) / S(x)``, formed as a difference of logs."""
    x = _positive_x(x)
    return _out(np.exp(np.asarray(bir_logpdf(p, x)) - np.asarray(bir_logsf(p, x))), x)


def bir_cdf_series(p, x, policy: SeriesPolicy = DEFAULT_POLICY):
    """BIR cdf from its expansion as a mixture of inverse Rayleigh cdfs.

    ``F(x) = 1/B(a,b) * sum_n w_n exp(-(a+n) theta/x^2) / (a+n)`` where
    ``w_n`` are the coefficients of ``(1 - z)^(b-1)``.  The sum is finite
    when ``b`` is a positive integer.
    """
    x = _positive_x(x)
    if x.ndim:
        return np.array([bir_cdf_series(p, float(xi), policy) for xi in x.ravel()]).reshape(x.shape)
    t = p.theta / float(x) ** 2
    total = _series.binomial_series(
        p.b - 1.0, lambda n: np.exp(-n * t) / (p.a + n), policy
    )
    if total <= 0.0:
        return 0.0
    value = math.exp(-p.a * t - _betaln(p.a, p.b) + math.log(total))
    return min(value, 1.0)


def bir_quantile(p, u):
    """Quantile ``sqrt(-theta / log(I_u^{-1}(a, b)))`` for ``0 < u < 1``."""
    u = _open_unit(u)
    y, w = _inc_beta_inv_pair(u, p.a, p.b)
    with np.errstate(divide="ignore"):
        t = np.where(y <= 0.5, -np.log(y), -np.log1p(-w))
        x = np.sqrt(p.theta / t)
    return _out(x, u)


_BIT_GENERATORS = ("PCG64", "PCG64DXSM", "Philox", "SFC64", "MT19937")


@dataclass(frozen=True)
class RngSpec:
    """Seed plus numpy bit-generator name; equal specs give bit-identical streams."""

    seed: int = 0
    algorithm: str = "PCG64"

    def __post_init__(self):
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.algorithm not in _BIT_GENERATORS:
            raise DomainError(f"unknown algorithm {self.algorithm!r}; choose from {_BIT_GENERATORS}")

    def generator(self):
        return np.random.Generator(getattr(np.random, self.algorithm)(int(self.seed)))


def _open_uniforms(gen, n):
    # 53-bit grid shifted by half a step: never exactly 0 or 1
    return (gen.integers(0, 2**53, size=n, dtype=np.int64) + 0.5) / 2.0**53


def bir_sample(p, n, rng=None):
    """Draw ``n`` BIR variates by inverse transform of open-interval uniforms.

    Parameters
    ----------
    p : BirParams
    n : int
        Number of variates, ``n >= 1``.
    rng : RngSpec, optional
        Defaults to ``RngSpec(seed=0)``.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    rng = RngSpec() if rng is None else rng
    u = _open_uniforms(rng.generator(), int(n))
    return bir_quantile(p, u)
