"""Exception types shared across the package."""


class PointerThermError(Exception):
    """Base class for all package errors."""


class InvalidStateError(PointerThermError):
    """A matrix fails the density-operator checks (hermiticity, trace, positivity)."""


class ParameterError(PointerThermError):
    """A physical or numerical parameter is out of its valid range."""


class ModelConstructionError(PointerThermError):
    """A reference-oracle model could not be built (e.g. negative rate)."""


class ConfigError(PointerThermError):
    """A run configuration file or flag set is invalid."""


class NumericalBlowupError(PointerThermError):
    """The hierarchy integration produced non-finite or runaway values.

    Carries diagnostic context: the offending time and, when available,
    the partial trajectory recorded up to the failure.
    """

    def __init__(self, message, t=None, index=None, partial=None):
        super().__init__(message)
        self.t = t
        self.index = index
        self.partial = partial
