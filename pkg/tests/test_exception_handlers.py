"""
Tests for gaugeline.errors.exception_handlers module.
"""

from unittest.mock import patch

import pytest
from pydantic import BaseModel, ValidationError

from gaugeline.errors import ConfigParseError, DomainError, GaugelineError, InsufficientBallsError
from gaugeline.errors.exception_handlers import (
    ExceptionHandlers,
    get_exception_handlers,
    handle_exception,
)
from gaugeline.responses import FailureSchema


def _validation_error() -> ValidationError:
    class Sample(BaseModel):
        required_field: int

    with pytest.raises(ValidationError) as exc_info:
        Sample(required_field="not a number")
    return exc_info.value


class TestExceptionHandlers:
    """Test cases for ExceptionHandlers class."""

    def test_generic_exception_handler(self):
        """Test generic exception handler."""
        with patch("gaugeline.errors.exception_handlers.logger.exception") as mock_logger:
            exit_code, failure = ExceptionHandlers.generic_exception_handler(
                ValueError("Test generic error")
            )

        mock_logger.assert_called_once_with("Generic Exception: Test generic error")
        assert exit_code == 1
        assert isinstance(failure, FailureSchema)
        assert failure.status == "failure"
        assert failure.message == "Something went wrong during the analysis."
        assert failure.error == {"type": "ValueError", "detail": "Test generic error"}

    def test_config_validation_exception_handler(self):
        """Test the configuration validation handler."""
        exc = _validation_error()

        with patch("gaugeline.errors.exception_handlers.logger.exception") as mock_logger:
            exit_code, failure = ExceptionHandlers.config_validation_exception_handler(exc)

        mock_logger.assert_called_once()
        assert exit_code == 64
        assert failure.message == "Config Validation Error"
        assert failure.error["type"] == "ValidationError"
        assert failure.error["detail"][0]["loc"] == ("required_field",)

    def test_exception_handler_generator(self):
        """Test that generated handlers carry the error's exit code and message."""

        class CustomError(GaugelineError):
            pass

        handler = ExceptionHandlers.exception_handler_generator(CustomError)
        exc = CustomError(message="Custom error occurred", ec="CUSTOM_001", exit_code=3)

        with patch("gaugeline.errors.exception_handlers.logger.exception") as mock_logger:
            exit_code, failure = handler(exc)

        mock_logger.assert_called_once()
        assert exit_code == 3
        assert failure.message == "CUSTOM_001: Custom error occurred"
        assert failure.error == {"type": "CustomError", "ec": "CUSTOM_001"}


class TestGetExceptionHandlers:
    """Test cases for get_exception_handlers function."""

    def test_default_handlers(self):
        """Test the default registry."""
        handlers = get_exception_handlers()

        assert set(handlers) == {ValidationError, GaugelineError, Exception}
        assert handlers[Exception] is ExceptionHandlers.generic_exception_handler
        assert (
            handlers[ValidationError] is ExceptionHandlers.config_validation_exception_handler
        )

    def test_with_exceptions_list(self):
        """Test that listed errors get their own generated handler."""
        handlers = get_exception_handlers(exceptions_list=[DomainError, ConfigParseError])

        assert DomainError in handlers
        assert ConfigParseError in handlers

    def test_custom_validation_handler(self):
        """Test that a custom validation handler replaces the default."""

        def custom_validation_handler(exc):
            return 99, FailureSchema(message="custom")

        handlers = get_exception_handlers(custom_validation_handler=custom_validation_handler)

        assert handlers[ValidationError] is custom_validation_handler

    def test_custom_handlers_dict(self):
        """Test that extra handlers are merged in."""

        def custom_handler(exc):
            return 42, FailureSchema(message="custom")

        handlers = get_exception_handlers(exception_handlers={KeyError: custom_handler})

        assert handlers[KeyError] is custom_handler


class TestHandleException:
    """Test cases for the MRO based dispatch."""

    @pytest.fixture(autouse=True)
    def quiet_logger(self):
        with patch("gaugeline.errors.exception_handlers.logger.exception"):
            yield

    def test_gaugeline_error_subclass_uses_base_handler(self):
        """Test that subclasses fall through to the GaugelineError handler."""
        exit_code, failure = handle_exception(
            InsufficientBallsError(found=2, requested=10), get_exception_handlers()
        )

        assert exit_code == 65
        assert failure.error == {"type": "InsufficientBallsError", "ec": "GEO_001"}

    def test_config_parse_error_exit_code(self):
        """Test that usage errors exit with 64."""
        exit_code, _ = handle_exception(ConfigParseError("no command"), get_exception_handlers())

        assert exit_code == 64

    def test_validation_error(self):
        """Test that pydantic validation errors map to usage errors."""
        exit_code, failure = handle_exception(_validation_error(), get_exception_handlers())

        assert exit_code == 64
        assert failure.message == "Config Validation Error"

    def test_unknown_exception(self):
        """Test that unknown exceptions reach the generic handler."""
        exit_code, failure = handle_exception(RuntimeError("boom"), get_exception_handlers())

        assert exit_code == 1
        assert failure.error["type"] == "RuntimeError"

    def test_closest_class_wins(self):
        """Test that a more specific registration is preferred."""
        handlers = get_exception_handlers(
            exception_handlers={DomainError: lambda exc: (7, FailureSchema(message="domain"))}
        )

        exit_code, failure = handle_exception(DomainError("bad n"), handlers)

        assert exit_code == 7
        assert failure.message == "domain"

    def test_empty_registry_falls_back_to_generic(self):
        """Test the fallback when nothing is registered."""
        exit_code, _ = handle_exception(KeyError("x"), {})

        assert exit_code == 1


class TestModuleExports:
    """Test module exports."""

    def test_all_exports(self):
        """Test that __all__ contains expected exports."""
        from gaugeline.errors import exception_handlers

        assert set(exception_handlers.__all__) == {"get_exception_handlers", "handle_exception"}
