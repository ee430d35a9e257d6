"""Exception types shared across the package."""


class ParcelCAError(Exception):
    """Base class for all package-specific errors."""


class InputError(ParcelCAError):
    """An input file is missing, unparseable, or violates the format contract."""


class EmptyNetworkError(InputError):
    """A road file parsed fine but contains no usable line features."""


class ConfigError(ParcelCAError):
    """Configuration is inconsistent (class table, covariates, pipeline config)."""


class InsufficientDataError(ParcelCAError):
    """Too few samples to perform the requested computation."""


class FitConvergenceError(ParcelCAError):
    """The logistic fit failed to converge (e.g. perfect separation with l2=0)."""


class UndefinedRateError(ParcelCAError):
    """An overlap rate was requested for a zero-area subject set."""


class PipelineStageError(ParcelCAError):
    """Wraps a failure inside one pipeline stage for one city."""

    def __init__(self, city_id: str, stage: str, cause: Exception):
        self.city_id = city_id
        self.stage = stage
        self.cause = cause
        super().__init__(f"city {city_id!r} failed in stage {stage!r}: {cause}")
