"""
Project loggers.

Every qe_bench module logs through get_project_logger(__name__). Console
output goes to stderr (stdout carries summaries and reports). QEB_LOG_LEVEL
picks the level and QEB_LOG_DIR adds a rotating qe_bench.log; the CLI re-applies
both through configure_project_logging() once config/.env and flags are read.
"""
import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Iterator, Optional

PROJECT_PREFIX = "qe_bench"
LOG_FILE_NAME = "qe_bench.log"
LOG_FILE_MAX_BYTES = 5 * 1024 * 1024
LOG_FILE_BACKUPS = 3

CONSOLE_FORMAT = '%(levelname)s: %(message)s'
FILE_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def resolve_level(name: Optional[str]) -> int:
    """Map a level name such as 'debug' to its logging constant (INFO if unknown)."""
    if not name:
        return logging.INFO
    level = logging.getLevelName(name.strip().upper())
    return level if isinstance(level, int) else logging.INFO


def _project_loggers() -> Iterator[logging.Logger]:
    for logger_name in list(logging.root.manager.loggerDict):
        if logger_name == PROJECT_PREFIX or logger_name.startswith(PROJECT_PREFIX + "."):
            yield logging.getLogger(logger_name)


def log_file_path(log_dir: Optional[str]) -> Optional[Path]:
    """qe_bench.log inside log_dir, creating the directory; None when unset or not writable."""
    if not log_dir:
        return None
    try:
        Path(log_dir).mkdir(parents=True, exist_ok=True)
    except OSError:
        return None
    return Path(log_dir) / LOG_FILE_NAME


def _attach_file(logger: logging.Logger, log_file: Optional[Path]) -> None:
    if log_file is None:
        return
    target = os.path.abspath(log_file)
    for handler in logger.handlers:
        if isinstance(handler, RotatingFileHandler) and handler.baseFilename == target:
            return
    handler = RotatingFileHandler(str(log_file), maxBytes=LOG_FILE_MAX_BYTES, backupCount=LOG_FILE_BACKUPS)
    handler.setFormatter(logging.Formatter(FILE_FORMAT))
    logger.addHandler(handler)


def get_project_logger(name: str) -> logging.Logger:
    """Logger for a qe_bench module, set up from QEB_LOG_LEVEL and QEB_LOG_DIR."""
    logger = logging.getLogger(name)
    logger.setLevel(resolve_level(os.getenv("QEB_LOG_LEVEL")))
    if not any(getattr(h, "qeb_console", False) for h in logger.handlers):
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        console.qeb_console = True
        logger.addHandler(console)
    _attach_file(logger, log_file_path(os.getenv("QEB_LOG_DIR")))
    logger.propagate = False
    return logger


def configure_project_logging(level: int, log_dir: Optional[str] = None) -> None:
    """
    Re-apply level and file output to loggers that already exist.

    Module loggers are created at import time, before the CLI has read
    config/.env and its flags.
    """
    log_file = log_file_path(log_dir)
    for logger in _project_loggers():
        logger.setLevel(level)
        _attach_file(logger, log_file)
