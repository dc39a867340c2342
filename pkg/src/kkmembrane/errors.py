"""Exception types raised across the package."""


class KKMembraneError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(KKMembraneError, ValueError):
    pass


class InvalidParameterError(KKMembraneError, ValueError):
    pass


class InvalidDataError(KKMembraneError, ValueError):
    pass


class DimensionError(KKMembraneError, ValueError):
    pass


class InsufficientDataError(KKMembraneError, ValueError):
    pass


class NoConvergenceError(KKMembraneError, RuntimeError):
    """An iterative solver hit its iteration cap.

    ``residual`` holds the last relative residual (or Rayleigh-quotient
    change for eigen-iterations).
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class PositivityError(KKMembraneError, RuntimeError):
    """A species went below the positivity tolerance."""

    def __init__(self, message, species=-1, cell=-1, value=float("nan")):
        super().__init__(message)
        self.species = species
        self.cell = cell
        self.value = value


class OpenProblemError(KKMembraneError, ValueError):
    """Raised when a monitor is asked to run outside the proven setting
    (distinct membrane permeabilities)."""


class ConfigError(KKMembraneError, ValueError):
    """Invalid run configuration; ``path`` locates the offending key."""

    def __init__(self, message, path=()):
        super().__init__(message)
        self.path = tuple(path)
