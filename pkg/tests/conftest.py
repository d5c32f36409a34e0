import math

import numpy as np
import pytest
from scipy import integrate
from scipy import special as sc

from bir import guinea_pigs

SHAPES = (0.5, 1.0, 2.0, 5.0)
SCALES = (0.5, 1.0, 3.0)


def ref_logpdf(a, b, theta, x):
    """Log density written out independently of the package."""
    t = theta / x**2
    return (
        math.log(2.0 * theta)
        - sc.betaln(a, b)
        - 3.0 * math.log(x)
        - a * t
        + (b - 1.0) * math.log(-math.expm1(-t))
    )


def ref_integrate(func, scale, upper=math.inf):
    """int_0^upper func(x) dx with x = exp(s), split around log(scale)."""
    centre = math.log(scale)

    def integrand(s):
        x = math.exp(s)
        return func(x) * x

    cuts = [centre - 60.0, centre - 3.0, centre - 1.0, centre, centre + 1.0, centre + 4.0, centre + 12.0, centre + 40.0, centre + 200.0]
    if upper < math.inf:
        top = math.log(upper)
        cuts = [c for c in cuts if c < top] + [top]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=500)
        total += val
    return total


def ref_expect(a, b, theta, g, upper=math.inf):
    """E[g(X); X < upper] for X ~ BIR(a, b, theta) by the reference quadrature."""

    def func(x):
        lf = ref_logpdf(a, b, theta, x)
        return 0.0 if lf < -745.0 else g(x) * math.exp(lf)

    return ref_integrate(func, math.sqrt(theta), upper)


@pytest.fixture(scope="session")
def guinea():
    return guinea_pigs().values


def _acceptance_log(config):
    if not hasattr(config, "_acceptance_log"):
        config._acceptance_log = []
    return config._acceptance_log


@pytest.fixture
def acceptance(request):
    log = _acceptance_log(request.config)

    def record(criterion, part, ok, detail):
        log.append((criterion, part, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    log = getattr(config, "_acceptance_log", None)
    if not log:
        return
    terminalreporter.section("acceptance criteria")
    by_criterion = {}
    for criterion, part, ok, detail in log:
        by_criterion.setdefault(criterion, []).append((part, ok, detail))
    for criterion in sorted(by_criterion):
        parts = by_criterion[criterion]
        ok = all(p[1] for p in parts)
        failed = [f"{p[0]}: {p[2]}" for p in parts if not p[1]]
        detail = "; ".join(failed) if failed else "; ".join(p[2] for p in parts)
        terminalreporter.write_line(f"criterion {criterion:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
