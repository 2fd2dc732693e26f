"""Custom exceptions for segcause."""

from typing import Optional


class SegCauseError(Exception):
    """Base exception for all errors."""

    pass


class ConfigurationError(SegCauseError):
    """Configuration validation or loading error."""

    pass


class DataError(SegCauseError):
    """Base exception for dataset and artifact content errors."""

    pass


class DataFormatError(DataError):
    """A dataset file could not be parsed."""

    def __init__(self, message: str, row: Optional[int] = None, column: Optional[str] = None):
        location = []
        if row is not None:
            location.append(f"row {row}")
        if column is not None:
            location.append(f"column '{column}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")
        self.row = row
        self.column = column


class InvariantViolationError(DataError):
    """A constructed value violates a domain invariant."""

    def __init__(self, message: str, sequence_id: Optional[str] = None):
        prefix = f"sequence '{sequence_id}': " if sequence_id is not None else ""
        super().__init__(f"{prefix}{message}")
        self.sequence_id = sequence_id


class NormalizationError(DataError):
    """An attribution map is not a normalized importance map."""

    pass


class DimensionMismatchError(SegCauseError):
    """Tensor or parameter shapes disagree."""

    def __init__(self, message: str, dimension: Optional[str] = None):
        super().__init__(message)
        self.dimension = dimension


class NumericDivergenceError(SegCauseError):
    """A loss or generated value left the finite range."""

    def __init__(self, message: str, epoch: Optional[int] = None):
        super().__init__(message)
        self.epoch = epoch


class MetricUndefinedError(SegCauseError):
    """A metric cannot be computed for the given labels or values."""

    pass


class ArtifactIOError(SegCauseError):
    """Reading or writing an artifact file failed."""

    pass
