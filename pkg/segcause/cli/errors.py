"""Unified error handling for CLI commands.

Maps exceptions to process exit codes and machine-readable error codes so
every subcommand fails the same way.
"""

import functools
from typing import Callable

from pydantic import ValidationError

from segcause.utils.constants import ExitCode
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
from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)


# Mapping of exceptions to exit codes and error codes
EXIT_CODES: dict[type[Exception], tuple[int, str]] = {
    ConfigurationError: (ExitCode.CONFIG, "CONFIGURATION_ERROR"),
    ValidationError: (ExitCode.CONFIG, "CONFIGURATION_ERROR"),
    DataFormatError: (ExitCode.DATA, "DATA_FORMAT_ERROR"),
    InvariantViolationError: (ExitCode.DATA, "INVARIANT_VIOLATION"),
    NormalizationError: (ExitCode.DATA, "NORMALIZATION_ERROR"),
    DataError: (ExitCode.DATA, "DATA_ERROR"),
    DimensionMismatchError: (ExitCode.DATA, "DIMENSION_MISMATCH"),
    ArtifactIOError: (ExitCode.DATA, "ARTIFACT_IO_ERROR"),
    MetricUndefinedError: (ExitCode.DATA, "METRIC_UNDEFINED"),
    NumericDivergenceError: (ExitCode.DIVERGENCE, "NUMERIC_DIVERGENCE"),
}


def resolve_exit_code(exc: BaseException) -> tuple[int, str]:
    """Exit and error code for an exception (subclasses inherit their parent's code)."""
    exc_type = type(exc)
    if exc_type in EXIT_CODES:
        return EXIT_CODES[exc_type]
    for known, codes in EXIT_CODES.items():
        if isinstance(exc, known):
            return codes
    if isinstance(exc, SegCauseError):
        return ExitCode.UNEXPECTED, "SEGCAUSE_ERROR"
    return ExitCode.UNEXPECTED, "INTERNAL_ERROR"


def handle_exception(exc: BaseException, operation: str = "") -> int:
    """Log an exception and return the process exit code.

    Args:
        exc: The exception that occurred
        operation: Description of the operation that failed

    Returns:
        Exit code for the failure
    """
    exit_code, error_code = resolve_exit_code(exc)
    operation_msg = f" during {operation}" if operation else ""
    if exit_code == ExitCode.UNEXPECTED:
        logger.exception(f"Unexpected error{operation_msg}: {exc}")
    else:
        logger.error(f"[{error_code}] Error{operation_msg}: {exc}")
    return exit_code


def cli_error_handler(operation: str) -> Callable:
    """Decorator turning a command's exceptions into exit codes.

    The wrapped command returns its own exit code on success (``None`` counts
    as success).

    Example:
        @cli_error_handler("training")
        def cmd_train(args):
            ...
    """

    def decorator(func: Callable[..., object]) -> Callable[..., int]:
        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> int:
            try:
                result = func(*args, **kwargs)
            except KeyboardInterrupt:
                logger.warning(f"Interrupted during {operation}")
                return ExitCode.UNEXPECTED
            except Exception as exc:
                return handle_exception(exc, operation)
            return ExitCode.OK if result is None else int(result)

        return wrapper

    return decorator
