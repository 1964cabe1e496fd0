"""Exception hierarchy shared across the package.

Every error the library raises derives from :class:`DriftLabError` so callers
(CLI, HTTP service) can map failures to exit codes / status codes uniformly.
"""


class DriftLabError(Exception):
    """Base class for all driftlab errors."""

    code = "error"


class FormatError(DriftLabError):
    """Malformed input file (bad header, bad record structure)."""

    code = "format_error"


class EmptyInputError(DriftLabError):
    """An operation received no usable data."""

    code = "empty_input"


class DuplicateTimestampError(DriftLabError):
    """Two records share the same timestamp within one series."""

    code = "duplicate_timestamp"


class InsufficientDataError(DriftLabError):
    """Not enough rows to perform the requested operation."""

    code = "insufficient_data"


class InsufficientSamplesError(DriftLabError):
    """A distribution window holds fewer samples than required."""

    code = "insufficient_samples"


class ShapeMismatchError(DriftLabError):
    """Array dimensions do not agree."""

    code = "shape_mismatch"


class ConfigError(DriftLabError):
    """An out-of-range or inconsistent configuration value."""

    code = "config_error"


class ValidationError(DriftLabError):
    """A domain object violates its invariants."""

    code = "validation_error"

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class UnknownExpertError(DriftLabError):
    """Label submitted for an expert_id that was never registered."""

    code = "unknown_expert"


class NoUsableModelError(DriftLabError):
    """Every ensemble member was rejected by the validation-error gate."""

    code = "no_usable_model"


class RangeError(DriftLabError):
    """A time interval falls outside the data it applies to."""

    code = "range_error"


class OrderingError(DriftLabError):
    """An interval has end <= start."""

    code = "ordering_error"


class OverlappingPeriodsError(DriftLabError):
    """Labelled periods overlap; merge them (consensus) before evaluation."""

    code = "overlapping_periods"


class NotFoundError(DriftLabError):
    """A referenced turbine, model, run or file does not exist."""

    code = "not_found"


class ReadOnlyError(DriftLabError):
    """Mutation attempted against a read-only service."""

    code = "read_only"
