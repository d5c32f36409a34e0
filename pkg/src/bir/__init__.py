"""Beta inverse Rayleigh distribution: densities, series properties and maximum-likelihood fitting."""

from .analytics import (
    inequality_curves,
    mean_deviations,
    mode,
    moment,
    order_stat_pdf,
    partial_expectation,
    quantile_shape,
    renyi_entropy,
    s_r,
    shannon_entropy,
)
from .datasets import guinea_pigs, load_data, parse_values
from .distributions import (
    BirParams,
    EIRParams,
    GRParams,
    IRParams,
    RayleighParams,
    RngSpec,
    bir_cdf,
    bir_hazard,
    bir_pdf,
    bir_quantile,
    bir_sample,
    bir_survival,
)
from .exceptions import (
    BIRError,
    BracketError,
    ConvergenceError,
    DomainError,
    MomentNonexistenceError,
    SeriesDivergenceError,
)
from .inference import (
    CriteriaSet,
    FitResult,
    criteria,
    fit_bir,
    fit_family,
    loglik,
    observed_info,
    score,
    standard_errors,
)
from .specfun import SeriesPolicy

__version__ = "0.1.0"
