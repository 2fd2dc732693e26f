"""Reusable configuration validators.

Provides validation functions shared by the settings model and the
typed configuration sections so every entry point rejects the same
malformed values with the same messages.
"""

from typing import Any, Optional

from segcause.utils.logging_config import get_logger

logger = get_logger(__name__)


def validate_positive_integer(value: Any, field_name: str = "value") -> int:
    """Validate a positive integer.

    Args:
        value: Value to validate
        field_name: Name of the field for error messages

    Returns:
        Validated integer

    Raises:
        ValueError: If value is not a positive integer
    """
    if not isinstance(value, int) or isinstance(value, bool):
        try:
            value = int(value)
        except (ValueError, TypeError):
            raise ValueError(f"{field_name} must be a valid integer")

    if value < 1:
        raise ValueError(f"{field_name} must be a positive integer")

    return value


def validate_non_negative_integer(value: Any, field_name: str = "value") -> int:
    """Validate an integer that may be zero.

    Raises:
        ValueError: If value is negative or not an integer
    """
    if not isinstance(value, int) or isinstance(value, bool):
        try:
            value = int(value)
        except (ValueError, TypeError):
            raise ValueError(f"{field_name} must be a valid integer")

    if value < 0:
        raise ValueError(f"{field_name} must be a non-negative integer")

    return value


def validate_odd_kernel(value: Any, field_name: str = "kernel") -> int:
    """Validate an odd, positive window width.

    Args:
        value: Kernel width
        field_name: Name of the field for error messages

    Returns:
        Validated kernel width

    Raises:
        ValueError: If the kernel is not a positive odd integer
    """
    value = validate_positive_integer(value, field_name)
    if value % 2 == 0:
        raise ValueError(f"{field_name} must be odd, got {value}")
    return value


def validate_open_unit_interval(value: Any, field_name: str = "value") -> float:
    """Validate a real strictly between 0 and 1."""
    value = _as_float(value, field_name)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{field_name} must be in (0, 1), got {value}")
    return value


def validate_closed_unit_interval(value: Any, field_name: str = "value") -> float:
    """Validate a real in [0, 1]."""
    value = _as_float(value, field_name)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{field_name} must be in [0, 1], got {value}")
    return value


def validate_positive_real(value: Any, field_name: str = "value") -> float:
    """Validate a strictly positive real."""
    value = _as_float(value, field_name)
    if value <= 0.0:
        raise ValueError(f"{field_name} must be positive, got {value}")
    return value


def validate_non_negative_real(value: Any, field_name: str = "value") -> float:
    """Validate a real that may be zero."""
    value = _as_float(value, field_name)
    if value < 0.0:
        raise ValueError(f"{field_name} must be non-negative, got {value}")
    return value


def validate_percent(value: Any, field_name: str = "k_percent") -> float:
    """Validate a percentage strictly inside (0, 100)."""
    value = _as_float(value, field_name)
    if not 0.0 < value < 100.0:
        raise ValueError(f"{field_name} must be in (0, 100), got {value}")
    return value


def validate_choice(value: Any, choices: tuple[str, ...], field_name: str = "value") -> str:
    """Validate that a string is one of a fixed set of choices.

    Args:
        value: Candidate value
        choices: Allowed values (compared case-insensitively)
        field_name: Name of the field for error messages

    Returns:
        The normalized (lowercase) choice

    Raises:
        ValueError: If value is not one of the choices
    """
    normalized = str(value).strip().lower()
    if normalized not in choices:
        raise ValueError(f"{field_name} must be one of: {', '.join(choices)} (got '{value}')")
    return normalized


def validate_log_level(level: str) -> str:
    """Validate a log level.

    Args:
        level: Log level string

    Returns:
        Normalized (uppercase) log level

    Raises:
        ValueError: If log level is invalid
    """
    valid_levels = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

    level = level.upper().strip()

    if level not in valid_levels:
        raise ValueError(f"Invalid log level: {level}. Must be one of: {', '.join(valid_levels)}")

    return level


def validate_boolean(value: Any, field_name: str = "value") -> bool:
    """Validate and convert a boolean value.

    Handles various boolean representations (bool, string, int).

    Args:
        value: Value to validate
        field_name: Name of the field for error messages

    Returns:
        Boolean value

    Raises:
        ValueError: If value cannot be converted to boolean
    """
    if isinstance(value, bool):
        return value

    if isinstance(value, str):
        value_lower = value.lower().strip()
        if value_lower in ("true", "1", "yes", "on"):
            return True
        if value_lower in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"{field_name} must be a boolean value")

    if isinstance(value, int):
        return bool(value)

    raise ValueError(f"{field_name} must be a boolean value")


def parse_int_list(value: Optional[str], field_name: str = "value") -> list[int]:
    """Parse a comma-separated list of integers.

    Args:
        value: String such as ``"0,1,2"``

    Returns:
        List of integers (empty entries skipped)

    Raises:
        ValueError: If any entry is not an integer or the list is empty
    """
    if value is None or not str(value).strip():
        raise ValueError(f"{field_name} must list at least one integer")

    items = []
    for raw in str(value).split(","):
        raw = raw.strip()
        if not raw:
            continue
        try:
            items.append(int(raw))
        except ValueError:
            raise ValueError(f"{field_name} contains a non-integer entry: '{raw}'")

    if not items:
        raise ValueError(f"{field_name} must list at least one integer")
    return items


def parse_float_list(value: Optional[str], field_name: str = "value") -> list[float]:
    """Parse a comma-separated list of reals.

    Raises:
        ValueError: If any entry is not a number or the list is empty
    """
    if value is None or not str(value).strip():
        raise ValueError(f"{field_name} must list at least one number")

    items = []
    for raw in str(value).split(","):
        raw = raw.strip()
        if not raw:
            continue
        items.append(_as_float(raw, field_name))

    if not items:
        raise ValueError(f"{field_name} must list at least one number")
    return items


def parse_schedule_knots(value: Optional[str]) -> list[tuple[float, float, float, float]]:
    """Parse loss schedule knots.

    Format: ``epoch:alpha:beta:gamma`` entries separated by commas, e.g.
    ``0:1.0:0.5:0.05,30:1.0:0.3:0.2,49:1.0:0.1:0.5``.

    Returns:
        List of (epoch, alpha, beta, gamma) tuples

    Raises:
        ValueError: If an entry is malformed, a weight is negative, or epochs
            are not strictly increasing
    """
    if value is None or not str(value).strip():
        raise ValueError("schedule must contain at least one knot")

    knots: list[tuple[float, float, float, float]] = []
    for entry in str(value).split(","):
        entry = entry.strip()
        if not entry:
            continue
        parts = entry.split(":")
        if len(parts) != 4:
            raise ValueError(f"Invalid schedule knot (expected epoch:alpha:beta:gamma): {entry}")
        epoch, alpha, beta, gamma = (_as_float(p, "schedule") for p in parts)
        if min(alpha, beta, gamma) < 0:
            raise ValueError(f"Schedule weights must be non-negative: {entry}")
        knots.append((epoch, alpha, beta, gamma))

    return validate_schedule_knots(knots)


def validate_schedule_knots(
    knots: list[tuple[float, float, float, float]],
) -> list[tuple[float, float, float, float]]:
    """Validate that knot epochs are strictly increasing and weights non-negative."""
    if not knots:
        raise ValueError("schedule must contain at least one knot")

    epochs = [k[0] for k in knots]
    if any(b <= a for a, b in zip(epochs, epochs[1:])):
        raise ValueError(f"Schedule epochs must be strictly increasing: {epochs}")
    if epochs[0] < 0:
        raise ValueError("Schedule epochs must be non-negative")
    for knot in knots:
        if min(knot[1:]) < 0:
            raise ValueError(f"Schedule weights must be non-negative: {knot}")
    if not any(k[1] > 0 for k in knots):
        raise ValueError("At least one schedule knot must have alpha > 0")
    return [tuple(float(v) for v in k) for k in knots]


def parse_adjacency(value: Optional[str], n_variables: int) -> Optional[list[list[int]]]:
    """Parse a binary adjacency matrix written row-wise.

    Format: rows separated by ``;``, entries by ``,``, e.g. ``1,0;1,1``.

    Returns:
        Nested list of 0/1 entries or None when value is empty

    Raises:
        ValueError: If the matrix is not N×N or has non-binary entries
    """
    if value is None or not str(value).strip():
        return None

    rows = [r.strip() for r in str(value).split(";") if r.strip()]
    matrix = []
    for row in rows:
        entries = [e.strip() for e in row.split(",")]
        if any(e not in ("0", "1") for e in entries):
            raise ValueError(f"Adjacency entries must be 0 or 1: '{row}'")
        matrix.append([int(e) for e in entries])

    if len(matrix) != n_variables or any(len(r) != n_variables for r in matrix):
        raise ValueError(f"Adjacency must be {n_variables}x{n_variables}")
    return matrix


def _as_float(value: Any, field_name: str) -> float:
    if isinstance(value, bool):
        raise ValueError(f"{field_name} must be a number")
    try:
        return float(value)
    except (ValueError, TypeError):
        raise ValueError(f"{field_name} must be a number")
