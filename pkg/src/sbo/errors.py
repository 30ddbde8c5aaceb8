"""Exception types shared across the package."""


class SBOError(Exception):
    """Base class for all errors raised by this package."""


class SizeError(SBOError, ValueError):
    """Sample count or array shape does not match the grid."""


class GridMismatchError(SBOError, ValueError):
    """Two fields that must share a grid (or lattice) do not."""


class ParameterError(SBOError, ValueError):
    """A parameter is outside its admissible range."""


class ResolutionError(SBOError, ValueError):
    """A lattice is too coarse to resolve the requested geometry.

    Carries the grid size that would be needed, when one can be computed.
    """

    def __init__(self, message, required_n=None, required_L=None):
        super().__init__(message)
        self.required_n = required_n
        self.required_L = required_L


class DivergenceError(SBOError, RuntimeError):
    """A time stepper or fixed-point iteration produced runaway values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NodeBudgetError(SBOError, ValueError):
    """A direct-summation request exceeds the configured node budget."""


class ConfigError(SBOError, ValueError):
    """Invalid run configuration; the message names the offending key path."""
