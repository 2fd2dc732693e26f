"""Utils module exports."""

from segcause.utils.exceptions import (
    ArtifactIOError,
    ConfigurationError,
    DataError,
    DataFormatError,
    DimensionMismatchError,
    InvariantViolationError,
    MetricUndefinedError,
    NormalizationError,
    NumericDivergenceError,
    SegCauseError,
)
from segcause.utils.logging_config import get_logger, set_run_context, setup_logging

__all__ = [
    # Exceptions
    "SegCauseError",
    "ConfigurationError",
    "DataError",
    "DataFormatError",
    "InvariantViolationError",
    "NormalizationError",
    "DimensionMismatchError",
    "NumericDivergenceError",
    "MetricUndefinedError",
    "ArtifactIOError",
    # Logging
    "get_logger",
    "set_run_context",
    "setup_logging",
]
