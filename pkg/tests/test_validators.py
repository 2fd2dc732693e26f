"""Tests for configuration validators."""

import pytest

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
    validate_odd_kernel,
    validate_open_unit_interval,
    validate_percent,
    validate_positive_integer,
    validate_positive_real,
    validate_schedule_knots,
)


class TestValidatePositiveInteger:
    """Tests for validate_positive_integer function."""

    def test_valid_integers(self):
        """Test valid positive integers."""
        assert validate_positive_integer(1) == 1
        assert validate_positive_integer(500) == 500

    def test_string_integers(self):
        """Test string representations are converted."""
        assert validate_positive_integer("128") == 128

    def test_zero_fails(self):
        """Test zero is rejected."""
        with pytest.raises(ValueError, match="must be a positive integer"):
            validate_positive_integer(0)

    def test_negative_fails(self):
        """Test negative values are rejected."""
        with pytest.raises(ValueError, match="must be a positive integer"):
            validate_positive_integer(-3)

    def test_non_numeric_fails(self):
        """Test non-numeric strings are rejected."""
        with pytest.raises(ValueError, match="must be a valid integer"):
            validate_positive_integer("abc")

    def test_custom_field_name_in_error(self):
        """Test custom field name appears in error."""
        with pytest.raises(ValueError, match="SCM_LENGTH must be a positive integer"):
            validate_positive_integer(0, "SCM_LENGTH")


class TestValidateNonNegativeInteger:
    """Tests for validate_non_negative_integer function."""

    def test_zero_allowed(self):
        """Test zero passes."""
        assert validate_non_negative_integer(0) == 0

    def test_negative_fails(self):
        """Test negative values are rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            validate_non_negative_integer(-1, "burn_in")


class TestValidateOddKernel:
    """Tests for validate_odd_kernel function."""

    def test_odd_kernel(self):
        """Test odd kernels pass."""
        assert validate_odd_kernel(1) == 1
        assert validate_odd_kernel(5) == 5

    def test_even_kernel_fails(self):
        """Test even kernels are rejected."""
        with pytest.raises(ValueError, match="must be odd"):
            validate_odd_kernel(4)

    def test_zero_kernel_fails(self):
        """Test a zero-width kernel is rejected before the parity check."""
        with pytest.raises(ValueError, match="positive integer"):
            validate_odd_kernel(0)


class TestUnitIntervals:
    """Tests for the unit interval validators."""

    def test_open_interval_bounds(self):
        """Test the open interval excludes both ends."""
        assert validate_open_unit_interval(0.9) == 0.9
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            validate_open_unit_interval(0.0)
        with pytest.raises(ValueError, match=r"\(0, 1\)"):
            validate_open_unit_interval(1.0)

    def test_closed_interval_bounds(self):
        """Test the closed interval includes both ends."""
        assert validate_closed_unit_interval(0.0) == 0.0
        assert validate_closed_unit_interval("1") == 1.0
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            validate_closed_unit_interval(1.5)

    def test_boolean_is_not_a_number(self):
        """Test booleans are not accepted as reals."""
        with pytest.raises(ValueError, match="must be a number"):
            validate_closed_unit_interval(True)


class TestValidatePositiveReal:
    """Tests for validate_positive_real function."""

    def test_positive(self):
        """Test positive reals pass."""
        assert validate_positive_real("1e-3") == 0.001

    def test_zero_fails(self):
        """Test zero is rejected."""
        with pytest.raises(ValueError, match="must be positive"):
            validate_positive_real(0, "learning_rate")


class TestValidatePercent:
    """Tests for validate_percent function."""

    def test_typical_values(self):
        """Test usual masking percentages."""
        assert validate_percent(15) == 15.0
        assert validate_percent("5") == 5.0

    @pytest.mark.parametrize("value", [0, 100, -1, 150])
    def test_out_of_range(self, value):
        """Test values outside (0, 100) are rejected."""
        with pytest.raises(ValueError, match=r"\(0, 100\)"):
            validate_percent(value)


class TestValidateChoice:
    """Tests for validate_choice function."""

    def test_case_insensitive(self):
        """Test choices are matched case-insensitively and normalized."""
        assert validate_choice(" CSV ", ("csv", "json")) == "csv"

    def test_unknown_choice(self):
        """Test unknown values list the allowed choices."""
        with pytest.raises(ValueError, match="must be one of: csv, json"):
            validate_choice("parquet", ("csv", "json"), "DATASET_FORMAT")


class TestValidateLogLevel:
    """Tests for validate_log_level function."""

    def test_valid_levels(self):
        """Test valid log levels."""
        assert validate_log_level("DEBUG") == "DEBUG"
        assert validate_log_level("info") == "INFO"
        assert validate_log_level("  Warning ") == "WARNING"

    def test_invalid_level(self):
        """Test invalid log level fails."""
        with pytest.raises(ValueError, match="Invalid log level"):
            validate_log_level("VERBOSE")


class TestValidateBoolean:
    """Tests for validate_boolean function."""

    def test_bool_values(self):
        """Test actual boolean values."""
        assert validate_boolean(True) is True
        assert validate_boolean(False) is False

    def test_string_values(self):
        """Test string representations."""
        for value in ("true", "1", "yes", "on", "TRUE"):
            assert validate_boolean(value) is True
        for value in ("false", "0", "no", "off"):
            assert validate_boolean(value) is False

    def test_int_values(self):
        """Test integer values."""
        assert validate_boolean(1) is True
        assert validate_boolean(0) is False

    def test_invalid_string(self):
        """Test invalid string fails."""
        with pytest.raises(ValueError, match="must be a boolean value"):
            validate_boolean("maybe")

    def test_invalid_type(self):
        """Test other types fail."""
        with pytest.raises(ValueError, match="must be a boolean value"):
            validate_boolean(1.5)


class TestParseLists:
    """Tests for the comma-separated list parsers."""

    def test_int_list(self):
        """Test seeds and ratios parse in order."""
        assert parse_int_list("0,1,2,3,4") == [0, 1, 2, 3, 4]

    def test_int_list_skips_empty_entries(self):
        """Test empty entries and whitespace are ignored."""
        assert parse_int_list(" 5, ,10 ,") == [5, 10]

    def test_int_list_rejects_non_integer(self):
        """Test non-integer entries are reported."""
        with pytest.raises(ValueError, match="non-integer entry: 'x'"):
            parse_int_list("1,x")

    def test_empty_list_fails(self):
        """Test empty input is rejected."""
        with pytest.raises(ValueError, match="at least one"):
            parse_int_list("")
        with pytest.raises(ValueError, match="at least one"):
            parse_float_list(None)

    def test_float_list(self):
        """Test Lipschitz sigmas parse as floats."""
        assert parse_float_list("0.01,0.02,0.05") == [0.01, 0.02, 0.05]


class TestScheduleKnots:
    """Tests for schedule knot parsing."""

    def test_parse_relative_knots(self):
        """Test a three-knot relative schedule."""
        knots = parse_schedule_knots("0:1.0:0.5:0.05,0.6:1.0:0.3:0.2,1:1.0:0.1:0.5")
        assert knots == [(0.0, 1.0, 0.5, 0.05), (0.6, 1.0, 0.3, 0.2), (1.0, 1.0, 0.1, 0.5)]

    def test_malformed_knot(self):
        """Test knots must have four fields."""
        with pytest.raises(ValueError, match="expected epoch:alpha:beta:gamma"):
            parse_schedule_knots("0:1.0:0.5")

    def test_negative_weight(self):
        """Test negative weights are rejected."""
        with pytest.raises(ValueError, match="non-negative"):
            parse_schedule_knots("0:1.0:-0.5:0.05")

    def test_epochs_must_increase(self):
        """Test knot epochs must be strictly increasing."""
        with pytest.raises(ValueError, match="strictly increasing"):
            validate_schedule_knots([(5, 1, 0, 0), (5, 1, 0, 0)])

    def test_alpha_required(self):
        """Test at least one knot keeps the task loss on."""
        with pytest.raises(ValueError, match="alpha > 0"):
            validate_schedule_knots([(0, 0, 1, 1)])


class TestParseAdjacency:
    """Tests for parse_adjacency function."""

    def test_parse_matrix(self):
        """Test a row-wise binary matrix."""
        assert parse_adjacency("1,0;1,1", 2) == [[1, 0], [1, 1]]

    def test_empty_returns_none(self):
        """Test empty input means 'draw at random'."""
        assert parse_adjacency("", 3) is None
        assert parse_adjacency(None, 3) is None

    def test_non_binary_entry(self):
        """Test entries other than 0/1 are rejected."""
        with pytest.raises(ValueError, match="must be 0 or 1"):
            parse_adjacency("1,2;0,1", 2)

    def test_wrong_shape(self):
        """Test the matrix must be N×N."""
        with pytest.raises(ValueError, match="3x3"):
            parse_adjacency("1,0;0,1", 3)
