"""
Root logger setup for gaugeline runs.

Reports go to stdout, so console logging always writes to stderr. Every line carries the run id
bound by :func:`start_run`.
"""

import logging
import pathlib
import sys
import uuid
from logging import StreamHandler
from logging.handlers import RotatingFileHandler

from asgi_correlation_id import CorrelationIdFilter, correlation_id

from gaugeline.config import LogConfig, PathConf

LOG_FORMAT = (
    "%(asctime)s - %(levelname)-6s - [%(module)s:%(funcName)s(): %(lineno)s] "
    "[%(correlation_id)s] - %(message)s"
)
TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


class TracebackFilter(logging.Filter):
    """Drops exception tracebacks from records unless LOG_ENABLE_TRACEBACK is set."""

    def filter(self, record: logging.LogRecord) -> bool:
        if not LogConfig.LOG_ENABLE_TRACEBACK:
            record.exc_info = None
            record.exc_text = None
        return True


def read_configuration(project_name: str):
    return {
        "name": project_name,
        "handlers": [
            {
                "type": "RotatingFileHandler",
                "max_bytes": LogConfig.LOG_MAX_BYTES,
                "back_up_count": LogConfig.LOG_BACKUP_COUNT,
                "enable": LogConfig.ENABLE_FILE_LOG,
            },
            {"type": "StreamHandler", "enable": LogConfig.ENABLE_CONSOLE_LOG},
        ],
    }


def start_run(run_id: str | None = None) -> str:
    """
    Binds a run id to the correlation context so that every log line and report of one
    CLI invocation carries the same identifier.
    """
    run_id = run_id or uuid.uuid4().hex
    correlation_id.set(run_id)
    return run_id


def _file_handler(project_name: str, handler_conf: dict) -> logging.Handler:
    logs_path = pathlib.Path(PathConf.LOGS_MODULE_PATH)
    logs_path.mkdir(parents=True, exist_ok=True)
    return RotatingFileHandler(
        logs_path / f"{project_name}.log",
        maxBytes=handler_conf["max_bytes"],
        backupCount=handler_conf["back_up_count"],
    )


def _stream_handler(project_name: str, handler_conf: dict) -> logging.Handler:
    return StreamHandler(sys.stderr)


HANDLER_BUILDERS = {
    "RotatingFileHandler": _file_handler,
    "StreamHandler": _stream_handler,
}


def configure_logger(project_name: str = PathConf.MODULE_NAME) -> logging.Logger:
    """
    Resets the root logger to the handlers enabled in LogConfig and quiets the numerical
    libraries listed in DEFER_LOG_MODULES / DEFER_ADDITIONAL_LOGS.
    """
    root = logging.getLogger()
    root.setLevel(LogConfig.LOG_LEVEL)
    root.handlers = []
    for module in [*LogConfig.DEFER_LOG_MODULES, *LogConfig.DEFER_ADDITIONAL_LOGS]:
        logging.getLogger(module).setLevel(LogConfig.DEFER_LOG_LEVEL)

    formatter = logging.Formatter(LOG_FORMAT, TIME_FORMAT)
    cid_filter = CorrelationIdFilter(uuid_length=32)
    for handler_conf in read_configuration(project_name)["handlers"]:
        if not handler_conf.get("enable"):
            continue
        handler = HANDLER_BUILDERS[handler_conf["type"]](project_name, handler_conf)
        handler.setFormatter(formatter)
        handler.addFilter(cid_filter)
        handler.addFilter(TracebackFilter())
        root.addHandler(handler)
    return root
