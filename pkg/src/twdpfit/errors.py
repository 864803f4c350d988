"""Exception taxonomy shared across the package.

The CLI maps these onto exit codes: parse errors exit 2, domain and
estimation errors exit 3, numerical failures exit 4.
"""


class TwdpfitError(Exception):
    """Base class for all package-specific errors."""


class DomainError(TwdpfitError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParseError(TwdpfitError, ValueError):
    """An input file could not be parsed."""


class EstimationError(TwdpfitError, RuntimeError):
    """An estimator cannot produce a meaningful result for the given data."""


class NumericalError(TwdpfitError, ArithmeticError):
    """A numerical routine failed to reach its accuracy target."""
