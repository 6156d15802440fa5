"""Exception types shared across the package."""


class EfimovError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(EfimovError, ValueError):
    """A parameter lies outside its admissible domain (e.g. beta <= 0)."""


class InfeasibleRangeError(EfimovError, ValueError):
    """No attractive Yamaguchi potential reproduces the requested constants."""


class NoDimerError(EfimovError):
    """The two-body sector has no bound dimer (1/a <= 0)."""


class PoleError(EfimovError):
    """Amplitude requested exactly at the dimer pole."""

    def __init__(self, message, kappa_d=None):
        super().__init__(message)
        self.kappa_d = kappa_d


class ThresholdViolationError(EfimovError):
    """Trial binding too shallow: a kernel denominator is not positive."""


class ExtrapolationError(EfimovError):
    """Spectator function evaluated outside its mesh support."""


class NumericalFailureError(EfimovError):
    """An iterative scheme did not converge within its budget."""


class InsufficientDataError(EfimovError):
    """Not enough spectrum levels for the requested analysis."""


class StaleLevelError(EfimovError):
    """The given binding momentum does not solve the trimer equation."""
