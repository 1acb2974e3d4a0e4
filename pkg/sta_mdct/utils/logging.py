"""
Log routing for the `sta-mdct` command line.

stdout carries the resolved configuration and the results as `key = value` lines, so
log records always go to stderr. Every record is stamped with the running subcommand.
`setup_logging` and `teardown_logging` bracket one command; calling `main` repeatedly in
one process (as the tests do) never stacks handlers.
"""

import logging
import os
import sys

from sta_mdct.config import LOG_LEVEL
from sta_mdct.errors import ConfigError

try:
    import coloredlogs
except ImportError:
    coloredlogs = None

LOG_FORMAT = "[%(asctime)s] %(levelname)s [%(command)s] %(name)s:%(lineno)d: %(message)s"
LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
# librosa imports numba; Pillow logs its plugin scan at DEBUG
QUIET_LOGGERS = ("numba", "PIL")
DEFAULT_COMMAND = "sta-mdct"

_base_factory = logging.getLogRecordFactory()
_handler: logging.Handler | None = None


def _formatter() -> logging.Formatter:
    if coloredlogs and os.path.exists(".env"):
        return coloredlogs.ColoredFormatter(fmt=LOG_FORMAT)
    return logging.Formatter(LOG_FORMAT)


def setup_logging(level: str = LOG_LEVEL, command: str | None = None) -> logging.Handler:
    """
    Send log records to stderr at `level`, tagged with `command`.

    Args:
        level (str): DEBUG, INFO, WARNING or ERROR (case-insensitive).
        command (str | None): Subcommand name shown in every record.

    Returns:
        logging.Handler: The stderr handler now attached to the root logger.

    Raises:
        ConfigError: Unknown level, e.g. from a bad LOG_LEVEL environment variable.
    """
    level = level.upper()
    if level not in LEVELS:
        raise ConfigError(f"log level must be one of {', '.join(LEVELS)}, got {level!r}")
    teardown_logging()

    tag = command or DEFAULT_COMMAND

    def record_factory(*args, **kwargs) -> logging.LogRecord:
        record = _base_factory(*args, **kwargs)
        record.command = tag
        return record

    global _handler
    logging.setLogRecordFactory(record_factory)
    _handler = logging.StreamHandler(sys.stderr)
    _handler.setFormatter(_formatter())
    root = logging.getLogger()
    root.addHandler(_handler)
    root.setLevel(level)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)
    return _handler


def teardown_logging() -> None:
    """Detach the handler installed by `setup_logging` and restore plain log records."""
    global _handler
    if _handler is not None:
        logging.getLogger().removeHandler(_handler)
        _handler = None
    logging.setLogRecordFactory(_base_factory)
