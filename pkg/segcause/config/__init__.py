"""Config module exports.

Settings are resolved lazily: the section models they build import the
validators from this package.
"""

from segcause.config.validators import (
    parse_adjacency,
    parse_float_list,
    parse_int_list,
    parse_schedule_knots,
    validate_boolean,
    validate_choice,
    validate_closed_unit_interval,
    validate_log_level,
    validate_non_negative_integer,
    validate_non_negative_real,
    validate_odd_kernel,
    validate_open_unit_interval,
    validate_percent,
    validate_positive_integer,
    validate_positive_real,
    validate_schedule_knots,
)

_SETTINGS_EXPORTS = ("Settings", "get_settings", "reload_settings")


def __getattr__(name: str):
    if name in _SETTINGS_EXPORTS:
        from segcause.config import settings

        return getattr(settings, name)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


__all__ = [
    "Settings",
    "get_settings",
    "reload_settings",
    # Validators
    "validate_positive_integer",
    "validate_non_negative_integer",
    "validate_odd_kernel",
    "validate_open_unit_interval",
    "validate_closed_unit_interval",
    "validate_positive_real",
    "validate_non_negative_real",
    "validate_percent",
    "validate_choice",
    "validate_log_level",
    "validate_boolean",
    "validate_schedule_knots",
    "parse_int_list",
    "parse_float_list",
    "parse_schedule_knots",
    "parse_adjacency",
]
