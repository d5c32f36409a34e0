"""Exception hierarchy shared by every module of the package."""


class BIRError(Exception):
    """Base class for all errors raised by :mod:`bir`."""


class DomainError(BIRError, ValueError):
    """An argument lies outside the mathematical domain of a function."""


class ConvergenceError(BIRError, ArithmeticError):
    """An iterative method exhausted its iteration budget."""


class SeriesDivergenceError(ConvergenceError):
    """A series did not reach the requested tolerance within its term cap."""


class MomentNonexistenceError(DomainError):
    """The requested moment is infinite (or has no series representation)."""


class BracketError(ConvergenceError):
    """A root could not be bracketed."""
