"""Utility functions and helpers for the backscatter toolkit.

This module provides logging setup, number formatting, and CSV output
helpers used throughout the application.
"""

import csv
import logging
import os
import sys
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from dotenv import load_dotenv

from .constants import ENV_LOG_LEVEL, FLOAT_FORMAT, LOG_DATE_FORMAT, LOG_FORMAT
from .exceptions import OutputError

# Load .env from project root so BACKSCATTER_* variables apply to library use too
_PROJECT_ROOT = Path(__file__).resolve().parent.parent
load_dotenv(_PROJECT_ROOT / ".env")


def resolve_log_level(level: Optional[int | str] = None) -> int:
    """Turn a level name, number, or None (environment default) into a logging level.

    Example:
        >>> resolve_log_level("debug")
        10
    """
    if level is None:
        level = os.getenv(ENV_LOG_LEVEL, "INFO")
    if isinstance(level, int):
        return level
    resolved = logging.getLevelName(str(level).upper())
    return resolved if isinstance(resolved, int) else logging.INFO


def setup_logging(
    name: str,
    level: Optional[int | str] = None,
    log_file: Optional[str] = None
) -> logging.Logger:
    """Configure and return a logger with consistent formatting.

    Args:
        name: Logger name (typically __name__ from the calling module)
        level: Logging level; defaults to $BACKSCATTER_LOG_LEVEL or INFO
        log_file: Optional file path to write logs to

    Returns:
        Configured logger instance

    Example:
        >>> logger = setup_logging(__name__)
        >>> logger.info("Solver started")
    """
    logger = logging.getLogger(name)
    level = resolve_log_level(level)
    logger.setLevel(level)

    # Avoid adding handlers multiple times
    if logger.handlers:
        return logger

    formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setLevel(logging.NOTSET)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def set_package_log_level(level: int | str, log_file: Optional[str] = None) -> None:
    """Apply a level (and optional extra file handler) to every package logger."""
    level = resolve_log_level(level)
    formatter = logging.Formatter(LOG_FORMAT, LOG_DATE_FORMAT)
    for name, logger in logging.root.manager.loggerDict.items():
        if not name.startswith("src") or not isinstance(logger, logging.Logger):
            continue
        logger.setLevel(level)
        if log_file and not any(isinstance(h, logging.FileHandler) for h in logger.handlers):
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)


def format_value(value: Any) -> str:
    """Format a CSV cell; floats keep at least 12 significant digits.

    Example:
        >>> format_value(0.1 + 0.2)
        '0.3'
        >>> format_value(True)
        '1'
    """
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float) or hasattr(value, "dtype") and value.dtype.kind == "f":
        return format(float(value), FLOAT_FORMAT)
    if hasattr(value, "item"):
        return str(value.item())
    return str(value)


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write rows under a mandatory header row.

    Args:
        path: Destination file; parent directories are created
        header: Column names
        rows: Row sequences, one value per column

    Returns:
        The written path

    Raises:
        OutputError: If the file cannot be written
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                if len(row) != len(header):
                    raise ValueError(f"row has {len(row)} values for {len(header)} columns")
                writer.writerow([format_value(v) for v in row])
    except (OSError, ValueError) as e:
        raise OutputError(str(path), str(e))
    return path


def format_power_tag(value: float) -> str:
    """Format a number for use inside a file name.

    Example:
        >>> format_power_tag(2.5)
        '2.5'
        >>> format_power_tag(2e-05)
        '2e-05'
    """
    return format(float(value), "g")
