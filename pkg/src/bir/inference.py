"""Maximum-likelihood fitting of the BIR distribution and its comparators.

The BIR fit maximizes the log-likelihood in ``(log a, log b, log theta)``:
a Nelder-Mead search from several starts, each followed by a Newton polish
that uses the analytic score and observed information.  The BIR likelihood
is often nearly flat along a ridge in which ``a`` grows while ``theta``
shrinks, so the polish only steps along directions of well-conditioned
negative curvature and convergence is judged on the score alone when the
information matrix is near singular.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy import special as sc

from .distributions import (
    BirParams,
    EIRParams,
    GRParams,
    IRParams,
    RayleighParams,
    family_params,
)
from .exceptions import DomainError
from .specfun import _betaln

__all__ = [
    "CriteriaSet",
    "FitResult",
    "loglik",
    "score",
    "observed_info",
    "criteria",
    "standard_errors",
    "condition_number",
    "fit_bir",
    "fit_family",
    "FLAT_CONDITION",
    "MIN_OBSERVATIONS",
]

log = logging.getLogger(__name__)

FLAT_CONDITION = 1e10
MIN_OBSERVATIONS = 4
_NM_XATOL = 1e-6
_NM_FATOL = 1e-9
_POLISH_EVERY = 10


def _as_data(data):
    x = np.asarray(data, dtype=float).ravel()
    if x.size == 0:
        raise DomainError("data must contain at least one observation")
    bad = ~(x > 0.0) | ~np.isfinite(x)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DomainError(f"observation {i} is not a finite positive number: {x[i]!r}")
    return x


# --------------------------------------------------------------------------
# BIR likelihood and derivatives


def _bir_terms(p, x):
    t = p.theta / x**2
    return t, np.log(-np.expm1(-t))


def _inv_expm1(t):
    # 1 / (e^t - 1) without overflow
    return np.exp(-t) / -np.expm1(-t)


def _inv_4sinh2(t):
    # 1 / (4 sinh^2(t/2)) = e^t / (e^t - 1)^2, without overflow
    return np.exp(-t) / np.expm1(-t) ** 2


def loglik(p: BirParams, data):
    """BIR log-likelihood of ``data``."""
    x = _as_data(data)
    n = x.size
    t, log_g = _bir_terms(p, x)
    ll = (
        n * (math.log(2.0 * p.theta) - _betaln(p.a, p.b))
        - 3.0 * math.fsum(np.log(x))
        - p.a * math.fsum(t)
        + (p.b - 1.0) * math.fsum(log_g)
    )
    return float(ll)


def score(p: BirParams, data):
    """Analytic gradient ``(dl/da, dl/db, dl/dtheta)``."""
    x = _as_data(data)
    n = x.size
    t, log_g = _bir_terms(p, x)
    inv_x2 = math.fsum(1.0 / x**2)
    psi_ab = float(sc.digamma(p.a + p.b))
    u_a = n * (psi_ab - float(sc.digamma(p.a))) - p.theta * inv_x2
    u_b = n * (psi_ab - float(sc.digamma(p.b))) + math.fsum(log_g)
    u_t = n / p.theta - p.a * inv_x2 + (p.b - 1.0) * math.fsum(_inv_expm1(t) / x**2)
    return np.array([u_a, u_b, u_t])


def _bir_hessian(p, x):
    n = x.size
    t = p.theta / x**2
    tg_ab = float(sc.polygamma(1, p.a + p.b))
    u_aa = n * (tg_ab - float(sc.polygamma(1, p.a)))
    u_bb = n * (tg_ab - float(sc.polygamma(1, p.b)))
    u_ab = n * tg_ab
    u_at = -math.fsum(1.0 / x**2)
    u_bt = math.fsum(_inv_expm1(t) / x**2)
    # d/dtheta of 1 / (x^2 (e^t - 1)) is -1 / (x^4 * 4 sinh^2(t/2))
    u_tt = -n / p.theta**2 - (p.b - 1.0) * math.fsum(_inv_4sinh2(t) / x**4)
    return np.array([[u_aa, u_ab, u_at], [u_ab, u_bb, u_bt], [u_at, u_bt, u_tt]])


def observed_info(p: BirParams, data):
    """Observed information: the negated Hessian of the log-likelihood, ordered ``(a, b, theta)``."""
    return -_bir_hessian(p, _as_data(data))


# --------------------------------------------------------------------------
# Criteria and standard errors


@dataclass(frozen=True)
class CriteriaSet:
    aic: float
    bic: float
    caic: float  # small-sample corrected AIC
    hqic: float


def criteria(loglik_value, k, n):
    """AIC, BIC, corrected AIC and HQIC for a fit with ``k`` parameters on ``n`` points."""
    if isinstance(k, bool) or int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer, got {k!r}")
    if isinstance(n, bool) or int(n) != n or n <= k + 1:
        raise DomainError(f"need n > k + 1 for the corrected AIC, got n={n!r}, k={k!r}")
    k, n = int(k), int(n)
    dev = -2.0 * loglik_value
    aic = dev + 2.0 * k
    return CriteriaSet(
        aic=aic,
        bic=dev + k * math.log(n),
        caic=aic + 2.0 * k * (k + 1) / (n - k - 1),
        hqic=dev + 2.0 * k * math.log(math.log(n)),
    )


def _equilibrate(info):
    sym = 0.5 * (info + info.T)
    d = np.sqrt(np.abs(np.diag(sym)))
    d[d == 0.0] = 1.0
    return sym / np.outer(d, d), d


def condition_number(info):
    """Condition number of ``info`` after symmetric diagonal scaling (inf if singular).

    The scaling makes the number independent of the units of each
    parameter, so it measures genuine flatness of the likelihood.
    """
    info = np.asarray(info, dtype=float)
    if not np.all(np.isfinite(info)):
        return math.inf
    scaled, _ = _equilibrate(info)
    ev = np.abs(np.linalg.eigvalsh(scaled))
    lo = np.min(ev)
    return math.inf if lo == 0.0 else float(np.max(ev) / lo)


def standard_errors(info):
    """Square roots of the diagonal of ``info^-1``, or None unless ``info`` is positive definite.

    The inverse is taken after symmetric diagonal scaling.  Ill-conditioned
    but positive definite matrices still yield (large) standard errors; the
    condition number is logged.
    """
    info = np.asarray(info, dtype=float)
    if not np.all(np.isfinite(info)):
        log.info("information matrix has non-finite entries")
        return None
    scaled, d = _equilibrate(info)
    ev = np.linalg.eigvalsh(scaled)
    if ev[0] <= 0.0 or np.any(np.diag(info) <= 0.0):
        log.info(
            "information matrix not positive definite (min scaled eigenvalue %.3g, cond %.3g)",
            ev[0],
            condition_number(info),
        )
        return None
    cond = float(ev[-1] / ev[0])
    if cond > FLAT_CONDITION:
        log.info("information matrix ill-conditioned (cond %.3g); standard errors unreliable", cond)
    try:
        cov = np.linalg.inv(scaled)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(scaled, hermitian=True)
    return np.sqrt(np.abs(np.diag(cov))) / d


# --------------------------------------------------------------------------
# Fit results


@dataclass
class FitResult:
    family: str
    params: object  # parameter record, None when the fit produced no estimate
    estimates: tuple
    names: tuple
    loglik: float
    std_errors: tuple | None
    criteria: CriteriaSet | None
    n_obs: int
    converged: bool
    n_restarts_used: int
    flat_direction: bool = False
    condition_number: float = math.nan
    message: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        crit = self.criteria
        return {
            "family": self.family,
            "names": list(self.names),
            "estimates": [float(v) for v in self.estimates],
            "std_errors": None if self.std_errors is None else [float(v) for v in self.std_errors],
            "loglik": float(self.loglik),
            "aic": None if crit is None else crit.aic,
            "bic": None if crit is None else crit.bic,
            "caic": None if crit is None else crit.caic,
            "hqic": None if crit is None else crit.hqic,
            "converged": bool(self.converged),
            "n_obs": int(self.n_obs),
            "n_restarts_used": int(self.n_restarts_used),
            "flat_direction": bool(self.flat_direction),
            "condition_number": None if not math.isfinite(self.condition_number) else self.condition_number,
            "message": self.message,
        }


def _finish(family, values, x, ll, info, n_restarts, converged, message="", se=None, flat=None):
    params = family_params(family, values)
    k = len(values)
    n = x.size
    cond = condition_number(info) if info is not None else math.nan
    if se is None and info is not None:
        se_arr = standard_errors(info)
        se = None if se_arr is None else tuple(float(v) for v in se_arr)
    if flat is None:
        flat = bool(cond > FLAT_CONDITION)
    crit = criteria(ll, k, n) if n > k + 1 and math.isfinite(ll) else None
    return FitResult(
        family=family,
        params=params,
        estimates=tuple(float(v) for v in values),
        names=type(params).names,
        loglik=float(ll),
        std_errors=se,
        criteria=crit,
        n_obs=n,
        converged=bool(converged),
        n_restarts_used=n_restarts,
        flat_direction=flat,
        condition_number=cond,
        message=message,
    )


# --------------------------------------------------------------------------
# Generic multi-start optimizer in log-parameter space


class _Model:
    """Log-likelihood with analytic derivatives in the natural parameters."""

    def __init__(self, family, ll, grad, hess):
        self.family = family
        self.ll = ll
        self.grad = grad
        self.hess = hess

    def safe_ll(self, values):
        try:
            v = self.ll(values)
        except (DomainError, FloatingPointError, OverflowError, ValueError):
            return -math.inf
        return v if math.isfinite(v) else -math.inf


def _is_stationary(grad, values, ll, tol):
    # score in log-parameter coordinates: unit-free, so invariant under rescaling the data
    return bool(np.max(np.abs(np.asarray(grad) * np.asarray(values))) <= tol * (1.0 + abs(ll)))


def _newton_polish(model, eta, tol, max_iter=100):
    """Newton ascent in log space restricted to well-conditioned concave directions.

    Stops as soon as the score meets the stationarity tolerance, so on a
    flat ridge the iterate is not pushed along the ridge.
    """
    p = np.exp(eta)
    ll = model.safe_ll(p)
    for _ in range(max_iter):
        g_nat = model.grad(p)
        if _is_stationary(g_nat, p, ll, tol):
            break
        g = g_nat * p
        h = model.hess(p) * np.outer(p, p) + np.diag(g)
        ev, vec = np.linalg.eigh(-0.5 * (h + h.T))
        keep = ev > max(np.max(np.abs(ev)), 1.0) / FLAT_CONDITION
        if not keep.any():
            break
        coef = vec.T @ g
        step = vec[:, keep] @ (coef[keep] / ev[keep])
        if not np.all(np.isfinite(step)):
            break
        scale = 1.0
        improved = False
        while scale > 1e-10:
            cand = eta + scale * step
            cand_ll = model.safe_ll(np.exp(cand))
            if cand_ll >= ll:
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
        moved = np.max(np.abs(cand - eta))
        eta, ll, p = cand, cand_ll, np.exp(cand)
        if moved <= 1e-15:
            break
    return eta, ll


def _acceptable(model, eta, ll, tol):
    """Stationary, with curvature either negative definite or flat beyond diagnosis."""
    p = np.exp(eta)
    if not (math.isfinite(ll) and _is_stationary(model.grad(p), p, ll, tol)):
        return False
    info = -model.hess(p)
    if condition_number(info) > FLAT_CONDITION:
        return True
    return bool(np.linalg.eigvalsh(0.5 * (info + info.T))[0] > 0.0)


def _optimize_one(model, eta0, tol):
    """Nelder-Mead from ``eta0`` with periodic Newton polishing of the best vertex.

    The search stops at the first polished vertex that passes the
    convergence test; on a flat ridge this keeps the simplex from drifting
    to the far end of the ridge, where the likelihood has no maximizer.
    """

    def objective(eta):
        return -model.safe_ll(np.exp(eta))

    found = []

    def checkpoint(intermediate_result):
        checkpoint.calls += 1
        if checkpoint.calls % _POLISH_EVERY:
            return
        eta, ll = _newton_polish(model, np.asarray(intermediate_result.x, dtype=float), tol)
        if _acceptable(model, eta, ll, tol):
            found.append((eta, ll))
            raise StopIteration

    checkpoint.calls = 0
    dim = eta0.size
    simplex = np.vstack([eta0] + [eta0 + 0.1 * e for e in np.eye(dim)])
    res = optimize.minimize(
        objective,
        eta0,
        method="Nelder-Mead",
        callback=checkpoint,
        options={
            "initial_simplex": simplex,
            "xatol": _NM_XATOL,
            "fatol": _NM_FATOL,
            "maxiter": 4000 * dim,
            "maxfev": 4000 * dim,
        },
    )
    if found:
        return found[0]
    return _newton_polish(model, np.asarray(res.x, dtype=float), tol)


def _multistart(model, starts, tol):
    """Best result over ``starts``; near-ties keep the earlier start."""
    best_eta, best_ll = None, -math.inf
    for eta0 in starts:
        eta, ll = _optimize_one(model, np.log(np.asarray(eta0, dtype=float)), tol)
        if best_eta is None or ll > best_ll + tol * (1.0 + abs(best_ll)):
            if math.isfinite(ll):
                best_eta, best_ll = eta, ll
    return best_eta, best_ll


# --------------------------------------------------------------------------
# BIR


def _check_fit_data(data):
    x = _as_data(data)
    if x.size < MIN_OBSERVATIONS:
        raise DomainError(
            f"insufficient observations: {x.size} given, at least {MIN_OBSERVATIONS} required"
        )
    return x


def _bir_starts(x, restarts, seed):
    theta_ir = x.size / math.fsum(1.0 / x**2)
    rng = np.random.default_rng(seed)
    starts = [(1.0, 1.0, theta_ir)]
    while len(starts) < restarts:
        a0, b0 = np.exp(rng.uniform(math.log(0.2), math.log(20.0), size=2))
        starts.append((a0, b0, theta_ir / a0))
    return starts[: max(restarts, 1)]


def fit_bir(data, restarts=8, seed=0, tol=1e-8):
    """Maximum-likelihood fit of ``BirParams`` to positive ``data``.

    Non-convergence is reported on the result rather than raised.
    """
    x = _check_fit_data(data)
    if isinstance(restarts, bool) or int(restarts) != restarts or restarts < 1:
        raise DomainError(f"restarts must be a positive integer, got {restarts!r}")
    restarts = int(restarts)
    if np.ptp(x) == 0.0:
        theta_ir = x.size / math.fsum(1.0 / x**2)
        return _finish(
            "bir",
            (1.0, 1.0, theta_ir),
            x,
            loglik(BirParams(1.0, 1.0, theta_ir), x),
            None,
            0,
            False,
            message="ill-posed: all observations are equal, the likelihood has no maximum",
        )

    model = _Model(
        "bir",
        lambda v: loglik(BirParams(*v), x),
        lambda v: score(BirParams(*v), x),
        lambda v: _bir_hessian(BirParams(*v), x),
    )
    eta, ll = _multistart(model, _bir_starts(x, restarts, seed), tol)
    if eta is None:
        return FitResult("bir", None, (math.nan,) * 3, BirParams.names, -math.inf, None, None,
                         x.size, False, restarts, message="no start produced a finite likelihood")
    values = np.exp(eta)
    p = BirParams(*values)
    info = observed_info(p, x)
    grad = score(p, x)
    cond = condition_number(info)
    pd = bool(np.linalg.eigvalsh(info)[0] > 0.0)
    flat = cond > FLAT_CONDITION
    stationary = _is_stationary(grad, values, ll, tol)
    converged = stationary and (pd or flat)
    msg = []
    if not stationary:
        msg.append(f"log-scale score norm {np.max(np.abs(grad * values)):.3g} above tolerance")
    if flat:
        msg.append(f"flat likelihood direction (information condition number {cond:.3g})")
    if not pd:
        msg.append("information matrix not positive definite")
    return _finish("bir", values, x, ll, info, restarts, converged, "; ".join(msg), flat=flat)


# --------------------------------------------------------------------------
# Comparators


def _fit_ir(x):
    n = x.size
    theta = n / math.fsum(1.0 / x**2)
    p = IRParams(theta)
    ll = math.fsum(np.atleast_1d(p.logpdf(x)))
    info = np.array([[n / theta**2]])
    return _finish("ir", (theta,), x, ll, info, 0, True)


def _fit_rayleigh(x):
    n = x.size
    sigma = math.sqrt(math.fsum(x**2) / (2.0 * n))
    p = RayleighParams(sigma)
    ll = math.fsum(np.atleast_1d(p.logpdf(x)))
    info = np.array([[4.0 * n / sigma**2]])
    return _finish("rayleigh", (sigma,), x, ll, info, 0, True)


def _fit_eir(x):
    ir = _fit_ir(x)
    theta = ir.estimates[0]
    ll = math.fsum(np.atleast_1d(EIRParams(1.0, theta).logpdf(x)))
    n = x.size
    # the likelihood depends on alpha * theta only; its Hessian has rank one
    grad_scale = np.array([theta, 1.0])
    info = (n / theta**2) * np.outer(grad_scale, grad_scale)
    res = _finish(
        "eir",
        (1.0, theta),
        x,
        ll,
        info,
        0,
        True,
        message=(
            f"only alpha*theta is identifiable; reported alpha=1, alpha*theta={theta:.6g}"
        ),
        se=None,
        flat=True,
    )
    res.extra["alpha_theta"] = theta
    res.extra["alpha_theta_se"] = ir.std_errors[0]
    return res


def _gr_ll(v, x):
    return math.fsum(np.atleast_1d(GRParams(*v).logpdf(x)))


def _gr_grad(v, x):
    alpha, lam = v
    z = (lam * x) ** 2
    n = x.size
    d_alpha = n / alpha + math.fsum(np.log(-np.expm1(-z)))
    d_lam = (
        2.0 * n / lam
        - 2.0 * lam * math.fsum(x**2)
        + (alpha - 1.0) * math.fsum(2.0 * lam * x**2 * _inv_expm1(z))
    )
    return np.array([d_alpha, d_lam])


def _gr_hess(v, x):
    alpha, lam = v
    z = (lam * x) ** 2
    n = x.size
    h_aa = -n / alpha**2
    h_al = math.fsum(2.0 * lam * x**2 * _inv_expm1(z))
    h_ll = (
        -2.0 * n / lam**2
        - 2.0 * math.fsum(x**2)
        + (alpha - 1.0) * math.fsum(2.0 * x**2 * _inv_expm1(z) - 4.0 * z * x**2 * _inv_4sinh2(z))
    )
    return np.array([[h_aa, h_al], [h_al, h_ll]])


def _fit_gr(x, restarts=8, seed=0, tol=1e-8):
    model = _Model("gr", lambda v: _gr_ll(v, x), lambda v: _gr_grad(v, x), lambda v: _gr_hess(v, x))
    lam0 = 1.0 / math.sqrt(2.0 * math.fsum(x**2) / (2.0 * x.size))
    rng = np.random.default_rng(seed)
    starts = [(1.0, lam0)]
    while len(starts) < restarts:
        alpha0 = math.exp(rng.uniform(math.log(0.1), math.log(10.0)))
        starts.append((alpha0, lam0 * math.exp(rng.uniform(-1.0, 1.0))))
    eta, ll = _multistart(model, starts, tol)
    values = np.exp(eta)
    info = -_gr_hess(values, x)
    grad = _gr_grad(values, x)
    pd = bool(np.linalg.eigvalsh(info)[0] > 0.0)
    stationary = _is_stationary(grad, values, ll, tol)
    msg = "" if stationary else f"log-scale score norm {np.max(np.abs(grad * values)):.3g} above tolerance"
    return _finish("gr", values, x, ll, info, len(starts), stationary and pd, msg)


def fit_family(family, data, restarts=8, seed=0, tol=1e-8):
    """Fit one of ``"bir"``, ``"eir"``, ``"ir"``, ``"rayleigh"``, ``"gr"`` by maximum likelihood."""
    if family == "bir":
        return fit_bir(data, restarts=restarts, seed=seed, tol=tol)
    x = _check_fit_data(data)
    if family == "ir":
        return _fit_ir(x)
    if family == "rayleigh":
        return _fit_rayleigh(x)
    if family == "eir":
        return _fit_eir(x)
    if family == "gr":
        return _fit_gr(x, restarts=restarts, seed=seed, tol=tol)
    raise DomainError(f"unknown family {family!r}")
