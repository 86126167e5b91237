"""Exception hierarchy.

Configuration problems and numerical failures are kept apart so that the
command-line front end can map them onto distinct exit codes.
"""


class CavityPairsError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(CavityPairsError, ValueError):
    """The inputs violate a model invariant."""


class InvalidLinewidth(ConfigurationError):
    pass


class AboveThreshold(ConfigurationError):
    pass


class BadProcessOrder(ConfigurationError):
    pass


class MissingPumpMode(ConfigurationError):
    pass


class GridMismatch(ConfigurationError):
    pass


class GridTooShort(ConfigurationError):
    pass


class NonUniformGrid(ConfigurationError):
    pass


class NumericalError(CavityPairsError, ArithmeticError):
    """A computation could not produce a trustworthy number."""


class UnderSampled(NumericalError):
    pass


class ZeroFlux(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class DegenerateData(NumericalError):
    pass


class ShallowDip(NumericalError):
    pass


class UnderSampledWarning(RuntimeWarning):
    """Issued where undersampling degrades accuracy but is not fatal."""


class PairOverlapWarning(UserWarning):
    """Pair rate is high enough that successive pairs overlap in time."""
