import logging as logger
from typing import Callable, Dict, List, Tuple

from pydantic import ValidationError

from gaugeline.errors import GaugelineError
from gaugeline.responses import FailureSchema

HandlerResult = Tuple[int, FailureSchema]


class ExceptionHandlers:
    @staticmethod
    def generic_exception_handler(exc: Exception) -> HandlerResult:
        logger.exception(f"Generic Exception: {exc}")
        return 1, FailureSchema(
            message="Something went wrong during the analysis.",
            error={"type": type(exc).__name__, "detail": str(exc)},
        )

    @staticmethod
    def config_validation_exception_handler(exc: ValidationError) -> HandlerResult:
        logger.exception(f"Config Validation Exception: {exc}")
        return 64, FailureSchema(
            message="Config Validation Error",
            error={"type": "ValidationError", "detail": exc.errors(include_url=False)},
        )

    @staticmethod
    def exception_handler_generator(exception: type[GaugelineError]):
        def exception_handler(exc: GaugelineError) -> HandlerResult:
            logger.exception(f"{exception.__name__}: {exc}")
            return exc.exit_code, FailureSchema(
                message=exc.message,
                error={"type": type(exc).__name__, "ec": exc.ec},
            )

        return exception_handler


def get_exception_handlers(
    exceptions_list: List[type[GaugelineError]] = None,
    custom_validation_handler: Callable = None,
    exception_handlers: Dict = None,
) -> Dict[type, Callable[[Exception], HandlerResult]]:
    handlers = {
        ValidationError: custom_validation_handler
        or ExceptionHandlers.config_validation_exception_handler,
        GaugelineError: ExceptionHandlers.exception_handler_generator(GaugelineError),
        Exception: ExceptionHandlers.generic_exception_handler,
    }
    handlers.update(exception_handlers or {})
    if exceptions_list:
        for exception in exceptions_list:
            handlers.update(
                {exception: ExceptionHandlers.exception_handler_generator(exception)}
            )
    return handlers


def handle_exception(
    exc: Exception, handlers: Dict[type, Callable[[Exception], HandlerResult]]
) -> HandlerResult:
    """Dispatches to the handler registered for the closest class in the MRO."""
    for klass in type(exc).__mro__:
        if klass in handlers:
            return handlers[klass](exc)
    return ExceptionHandlers.generic_exception_handler(exc)


__all__ = ["get_exception_handlers", "handle_exception"]
