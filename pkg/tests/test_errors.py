"""
Tests for gaugeline.errors module.
"""

import pytest

from gaugeline.errors import (
    ConfigParseError,
    CoverageGapError,
    DomainError,
    GaugelineError,
    HypothesisError,
    InsufficientBallsError,
    MisalignedConstraintError,
    NonMonotoneGaugeError,
    NullHomotopicLoopError,
    RangeError,
    SolverLimitError,
)


class TestGaugelineError:
    """Test cases for the base error class."""

    def test_default_initialization(self):
        """Test GaugelineError with default parameters."""
        error = GaugelineError()

        assert error.message == "The requested computation could not be carried out."
        assert error.ec is None
        assert error.exit_code == 65
        assert str(error) == error.message

    def test_initialization_with_error_code(self):
        """Test that the error code prefixes the message."""
        error = GaugelineError(message="grid too coarse", ec="GAU_999")

        assert error.message == "GAU_999: grid too coarse"
        assert error.ec == "GAU_999"
        assert str(error) == "GAU_999: grid too coarse"

    def test_initialization_with_exit_code(self):
        """Test GaugelineError with custom exit code."""
        assert GaugelineError(exit_code=3).exit_code == 3

    def test_property_setters(self):
        """Test message, ec and exit_code setters."""
        error = GaugelineError()
        error.message = "updated"
        error.ec = "X_1"
        error.exit_code = 7

        assert (error.message, error.ec, error.exit_code) == ("updated", "X_1", 7)

    def test_can_be_raised_and_caught(self):
        """Test that GaugelineError can be raised and caught."""
        with pytest.raises(GaugelineError) as exc_info:
            raise GaugelineError(message="boom", ec="T_001")

        assert exc_info.value.message == "T_001: boom"


class TestErrorHierarchy:
    """Test cases for the concrete errors."""

    @pytest.mark.parametrize(
        "error_class,ec,exit_code",
        [
            (DomainError, "GAU_001", 65),
            (RangeError, "GAU_002", 65),
            (MisalignedConstraintError, "ENV_001", 65),
            (SolverLimitError, "ENV_003", 65),
            (NonMonotoneGaugeError, "DIM_001", 65),
            (NullHomotopicLoopError, "HEX_002", 65),
            (ConfigParseError, "CLI_001", 64),
        ],
    )
    def test_default_codes(self, error_class, ec, exit_code):
        """Test that each error carries its code and exit status."""
        error = error_class("detail")

        assert isinstance(error, GaugelineError)
        assert error.ec == ec
        assert error.exit_code == exit_code
        assert error.message == f"{ec}: detail"

    def test_hypothesis_error_carries_index(self):
        """Test that the failing sequence index is kept."""
        error = HypothesisError("a_(n+1) / a_n^2 must be increasing", index=1)

        assert error.index == 1
        assert error.ec == "ENV_002"
        assert "(index 1)" in error.message

    def test_insufficient_balls_error(self):
        """Test that found and requested counts are reported."""
        error = InsufficientBallsError(found=2, requested=10)

        assert (error.found, error.requested) == (2, 10)
        assert error.message == "GEO_001: found 2 admissible disconnected balls, 10 requested"

    def test_coverage_gap_error(self):
        """Test that the uncovered cell and its image are reported."""
        error = CoverageGapError(cell=(3, 1), value=1.75)

        assert error.cell == (3, 1)
        assert error.value == 1.75
        assert error.message.startswith("HEX_001: image 1.75 of cell (3, 1)")
