"""Exception types shared across the package."""


class HomeschedError(Exception):
    """Base class for all errors raised by this package."""


class ModelError(HomeschedError):
    """An optimization model is malformed (bad bounds, duplicate terms, ...)."""


class NumericalBreakdown(HomeschedError):
    """The simplex engine lost numerical control and cannot certify a result."""


class BuildError(HomeschedError):
    """A household spec cannot be turned into a model (window too small, ...)."""


class InputError(HomeschedError):
    """An input file or series is unusable (bad CSV, empty series, ...)."""


class MetricsError(HomeschedError):
    """A summary statistic is undefined for the given series."""


class ConfigError(HomeschedError):
    """A config file failed validation; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")
