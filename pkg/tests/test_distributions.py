import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bir import analytics
from bir.distributions import (
    FAMILIES,
    BirParams,
    EIRParams,
    GRParams,
    IRParams,
    RayleighParams,
    RngSpec,
    bir_cdf,
    bir_cdf_series,
    bir_hazard,
    bir_logpdf,
    bir_pdf,
    bir_quantile,
    bir_sample,
    bir_survival,
    family_logpdf,
    family_params,
)
from bir.exceptions import DomainError, SeriesDivergenceError
from bir.specfun import SeriesPolicy

from conftest import SHAPES, ref_integrate, ref_logpdf

pos = st.floats(0.2, 8.0)


def test_params_validation():
    for bad in [(0, 1, 1), (1, -1, 1), (1, 1, float("nan")), (1, 1, float("inf"))]:
        with pytest.raises(DomainError):
            BirParams(*bad)
    with pytest.raises(DomainError):
        GRParams(1.0, 0.0)
    p = BirParams(1, 2, 3)
    assert p.values == (1.0, 2.0, 3.0) and isinstance(p.a, float)


def test_pdf_reduces_to_inverse_rayleigh():
    p = BirParams(1, 1, 1)
    assert bir_pdf(p, 1.0) == pytest.approx(2 * math.exp(-1), abs=1e-15)
    x = np.geomspace(0.1, 50, 200)
    for theta in (0.5, 2.0, 7.0):
        q = BirParams(1, 1, theta)
        np.testing.assert_allclose(bir_pdf(q, x), 2 * theta / x**3 * np.exp(-theta / x**2), rtol=1e-13)


def test_pdf_underflows_cleanly_near_origin():
    value = bir_pdf(BirParams(1, 1, 1), 0.05)
    assert value == pytest.approx(0.0, abs=1e-150) and not math.isnan(value)
    assert bir_pdf(BirParams(1, 1, 1), 1e-5) == 0.0


def _slope(fn, x, h):
    # five-point centred difference
    return (-fn(x + 2 * h) + 8 * fn(x + h) - 8 * fn(x - h) + fn(x - 2 * h)) / (12 * h)


def _cdf_slope(p, x):
    """Derivative of the cdf; differences the survival function where F > 1/2."""
    h = 1e-3 * x
    lower = _slope(lambda t: bir_cdf(p, t), x, h)
    upper = -_slope(lambda t: bir_survival(p, t), x, h)
    return np.where(bir_cdf(p, x) < 0.5, lower, upper)


def test_pdf_matches_independent_formula_and_cdf_slope():
    p = BirParams(2, 3, 1.5)
    assert bir_pdf(p, 1.2) == pytest.approx(float(_cdf_slope(p, 1.2)), abs=1e-10)
    assert bir_logpdf(p, 1.2) == pytest.approx(ref_logpdf(2, 3, 1.5, 1.2), abs=1e-13)


def test_pdf_large_shape_stays_finite():
    p = BirParams(1094.47, 0.61666, 1.23294)
    x = np.array([12.0, 70.0, 376.0])
    assert np.all(np.isfinite(bir_logpdf(p, x)))
    for xi in x:
        assert bir_logpdf(p, xi) == pytest.approx(ref_logpdf(p.a, p.b, p.theta, xi), rel=1e-12)


@pytest.mark.parametrize("a", SHAPES)
@pytest.mark.parametrize("b", SHAPES)
def test_cdf_slope_matches_pdf(a, b):
    p = BirParams(a, b, 1.3)
    x = np.geomspace(0.4, 30.0, 15)
    pdf = bir_pdf(p, x)
    keep = pdf > 1e-8
    np.testing.assert_allclose(_cdf_slope(p, x)[keep], pdf[keep], rtol=1e-6)


@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0, 5.0])
def test_pdf_integrates_to_one(theta):
    for a in SHAPES:
        for b in SHAPES:
            p = BirParams(a, b, theta)
            assert ref_integrate(lambda x: bir_pdf(p, x), math.sqrt(theta)) == pytest.approx(1.0, abs=1e-8)


def test_cdf_examples():
    assert bir_cdf(BirParams(1, 1, 1), 1.0) == pytest.approx(math.exp(-1), abs=1e-15)
    # exp(-theta / (2 x^2)) = sin(pi/4) at x = sqrt(2 / ln 2)
    x_half = math.sqrt(2.0 / math.log(2.0))
    assert bir_cdf(BirParams(0.5, 0.5, 2), x_half) == pytest.approx(0.5, abs=1e-12)


def test_arcsin_closed_form_agrees_with_incomplete_beta():
    from bir.specfun import reg_inc_beta

    p = BirParams(0.5, 0.5, 2.0)
    x = np.geomspace(0.3, 40, 60)
    np.testing.assert_allclose(bir_cdf(p, x), reg_inc_beta(np.exp(-2.0 / x**2), 0.5, 0.5), atol=1e-12)


def test_cdf_at_large_shape_matches_quadrature(guinea):
    p = BirParams(1094.47, 0.61666, 1.23294)
    x = float(np.median(guinea))
    mass = ref_integrate(lambda t: math.exp(ref_logpdf(p.a, p.b, p.theta, t)), x, upper=x)
    value = bir_cdf(p, x)
    assert 0.0 < value < 1.0
    assert value == pytest.approx(mass, abs=1e-8)


def test_series_cdf():
    assert bir_cdf_series(BirParams(1, 1, 1), 2.0) == pytest.approx(math.exp(-0.25), abs=1e-15)
    p = BirParams(2, 1.5, 1)
    assert bir_cdf_series(p, 1.5) == pytest.approx(bir_cdf(p, 1.5), abs=1e-9)
    q = BirParams(1, 3, 2)
    assert bir_cdf_series(q, 1.0) == pytest.approx(bir_cdf(q, 1.0), abs=1e-12)


@pytest.mark.parametrize("b", [0.3, 0.5, 1.7, 2.5, 4.0])
def test_series_cdf_within_ten_tolerances(b):
    policy = SeriesPolicy(rel_tol=1e-10)
    p = BirParams(1.3, b, 0.8)
    for x in (0.3, 0.9, 2.0, 6.0):
        exact = bir_cdf(p, x)
        assert abs(bir_cdf_series(p, x, policy) - exact) <= 10 * policy.rel_tol * max(exact, 1e-300) + 1e-15


def test_series_cdf_reports_divergence_when_capped():
    with pytest.raises(SeriesDivergenceError):
        bir_cdf_series(BirParams(1.0, 0.5, 1.0), 30.0, SeriesPolicy(rel_tol=1e-15, max_terms=100))


def test_quantile_examples():
    assert bir_quantile(BirParams(1, 1, 1), 0.5) == pytest.approx(math.sqrt(1 / math.log(2)), abs=1e-12)
    assert bir_quantile(BirParams(0.5, 0.5, 2), 0.5) == pytest.approx(math.sqrt(2 / math.log(2)), abs=1e-10)
    p = BirParams(3, 2, 0.7)
    assert bir_cdf(p, bir_quantile(p, 0.9)) == pytest.approx(0.9, abs=1e-10)


def test_quantile_rejects_endpoints():
    p = BirParams(1, 1, 1)
    for u in (0.0, 1.0, -0.2, 1.5):
        with pytest.raises(DomainError, match="quantile is undefined"):
            bir_quantile(p, u)


@pytest.mark.parametrize("a", SHAPES)
@pytest.mark.parametrize("b", SHAPES)
def test_quantile_round_trip_and_monotone(a, b):
    p = BirParams(a, b, 1.7)
    u = np.linspace(0.001, 0.999, 999)
    q = bir_quantile(p, u)
    assert np.all(np.diff(q) > 0)
    assert np.max(np.abs(bir_cdf(p, q) - u)) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(a=pos, b=pos, theta=pos, s=st.floats(0.1, 10.0), u=st.floats(0.01, 0.99))
def test_quantile_scale_equivariance(a, b, theta, s, u):
    base = bir_quantile(BirParams(a, b, theta), u)
    assert bir_quantile(BirParams(a, b, theta * s * s), u) == pytest.approx(s * base, rel=1e-12)


def test_survival_examples():
    p = BirParams(1, 1, 1)
    assert bir_survival(p, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-15)
    for q in (p, BirParams(2, 0.5, 3), BirParams(5, 5, 0.5)):
        far = bir_survival(q, 1e6 * math.sqrt(q.theta))
        assert far > 0.0 and math.isfinite(far)
    q = BirParams(2, 0.5, 1)
    assert bir_survival(q, 3.0) == pytest.approx(1 - bir_cdf(q, 3.0), abs=1e-12)


def test_survival_tail_is_accurate():
    # S(x) ~ (theta/x^2)^b / (b B(a, b)) far in the right tail
    p = BirParams(1.5, 2.0, 1.0)
    x = 1e5
    lead = (1.0 / x**2) ** 2 / (2.0 * math.exp(math.lgamma(1.5) + math.lgamma(2.0) - math.lgamma(3.5)))
    assert bir_survival(p, x) == pytest.approx(lead, rel=1e-6)


def test_hazard_examples():
    assert bir_hazard(BirParams(1, 1, 1), 1.0) == pytest.approx(2 * math.exp(-1) / (1 - math.exp(-1)), rel=1e-13)
    p = BirParams(1.5, 2, 1)
    assert 1e3 * bir_hazard(p, 1e3) == pytest.approx(4.0, rel=1e-2)
    q = BirParams(1, 2, 1)
    x = 0.15
    scaled = bir_hazard(q, x) * x**3 * math.exp(q.a * q.theta / x**2)
    assert scaled == pytest.approx(2 * q.theta / math.exp(math.lgamma(1) + math.lgamma(2) - math.lgamma(3)), rel=1e-2)


def test_hazard_positive_and_finite_everywhere():
    for p in (BirParams(0.5, 0.5, 1), BirParams(5, 5, 3), BirParams(1094.47, 0.61666, 1.23294)):
        h = bir_hazard(p, np.geomspace(1e-2, 1e6, 80) * math.sqrt(p.theta))
        assert np.all(np.isfinite(h)) and np.all(h >= 0)


def test_domain_errors_name_offending_value():
    p = BirParams(1, 1, 1)
    for fn in (bir_pdf, bir_cdf, bir_survival, bir_hazard):
        with pytest.raises(DomainError, match="-2"):
            fn(p, -2.0)
        with pytest.raises(DomainError):
            fn(p, 0.0)


def test_sampler_determinism_and_validation():
    p = BirParams(2, 2, 1)
    a1 = bir_sample(p, 10, RngSpec(seed=42))
    a2 = bir_sample(p, 10, RngSpec(seed=42))
    assert np.array_equal(a1, a2)
    assert not np.array_equal(a1, bir_sample(p, 10, RngSpec(seed=43)))
    assert np.array_equal(bir_sample(p, 1, RngSpec(seed=7)), bir_sample(p, 1, RngSpec(seed=7)))
    assert not np.array_equal(
        bir_sample(p, 10, RngSpec(seed=42, algorithm="Philox")), a1
    )
    for n in (0, -3, 2.5):
        with pytest.raises(DomainError):
            bir_sample(p, n)
    with pytest.raises(DomainError):
        RngSpec(seed=1, algorithm="nope")


def test_sampler_matches_cdf_by_ks():
    x = bir_sample(BirParams(1, 1, 1), 100_000, RngSpec(seed=2024))
    assert stats.kstest(x, lambda t: np.exp(-1.0 / t**2)).pvalue > 0.01


def test_sample_mean_matches_moment():
    p = BirParams(2, 2, 1)
    x = bir_sample(p, 100_000, RngSpec(seed=11))
    mu = analytics.moment(p, 1.0)
    # the variance is infinite, so use the spread of batch means as the error scale
    batches = x.reshape(100, 1000).mean(axis=1)
    se = batches.std(ddof=1) / math.sqrt(100)
    assert abs(x.mean() - mu) <= 3 * se


def test_comparator_log_densities():
    assert family_logpdf(IRParams(1.0), 1.0) == pytest.approx(math.log(2) - 1, abs=1e-15)
    x = np.geomspace(0.05, 100, 50)
    for alpha, theta in [(1.0, 3.0), (2.5, 0.4), (101.482, 21.5592)]:
        np.testing.assert_allclose(
            family_logpdf(EIRParams(alpha, theta), x), family_logpdf(IRParams(alpha * theta), x), atol=1e-13
        )
    np.testing.assert_allclose(
        family_logpdf(EIRParams(1.0, 3.0), x), family_logpdf(IRParams(3.0), x), atol=1e-14
    )


def test_rayleigh_loglik_on_guinea(guinea):
    ll = float(np.sum(family_logpdf(RayleighParams(90.6963), guinea)))
    assert -2 * ll == pytest.approx(816.59, abs=0.2)
    assert -2 * ll + 2 == pytest.approx(818.59, abs=0.2)


@pytest.mark.parametrize(
    "fp",
    [IRParams(2.0), EIRParams(1.5, 0.7), RayleighParams(1.3), GRParams(0.6, 0.9), BirParams(2, 3, 1)],
    ids=lambda fp: fp.family,
)
def test_every_family_is_a_consistent_distribution(fp):
    total = ref_integrate(lambda t: math.exp(fp.logpdf(t)) if math.isfinite(fp.logpdf(t)) else 0.0, 1.0)
    assert total == pytest.approx(1.0, abs=1e-9)
    for u in (0.05, 0.5, 0.95):
        x = float(fp.quantile(u))
        assert float(fp.cdf(x)) == pytest.approx(u, abs=1e-10)
        assert float(fp.sf(x)) == pytest.approx(1 - u, abs=1e-10)
    x = float(fp.quantile(0.4))
    assert float(fp.pdf(x)) == pytest.approx(_slope(fp.cdf, x, 1e-3 * x), rel=1e-6)


def test_family_registry():
    assert list(FAMILIES) == ["bir", "eir", "ir", "rayleigh", "gr"]
    assert family_params("gr", (0.5, 2.0)) == GRParams(0.5, 2.0)
    with pytest.raises(DomainError):
        family_params("weibull", (1.0,))
