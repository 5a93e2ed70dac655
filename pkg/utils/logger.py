"""Logging utilities for the command-line runs."""

from __future__ import annotations

import logging
from logging.handlers import RotatingFileHandler
import os
from pathlib import Path

from utils.paths import PROJECT_ROOT


LOG_DIR_ENV = "SWITCHHOM_LOG_DIR"
LOG_FILENAME = "switching_homogenization.log"

_BASE_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"


def log_path() -> Path:
    log_dir = Path(os.environ.get(LOG_DIR_ENV) or PROJECT_ROOT / "logs")
    log_dir.mkdir(parents=True, exist_ok=True)
    return log_dir / LOG_FILENAME


def get_logger(name: str = "switching_homogenization", level: int = logging.INFO) -> logging.Logger:
    """Return a logger configured with rotating file + console handlers.

    Handlers are attached to the root logger once, so module loggers created with
    ``logging.getLogger(__name__)`` in the library write to the same file.
    """

    root = logging.getLogger()
    if not any(getattr(handler, "_switchhom", False) for handler in root.handlers):
        formatter = logging.Formatter(_BASE_FORMAT)
        file_handler = RotatingFileHandler(log_path(), maxBytes=1_000_000, backupCount=3, encoding="utf-8")
        file_handler.setFormatter(formatter)
        file_handler._switchhom = True  # type: ignore[attr-defined]
        root.addHandler(file_handler)

        console_handler = logging.StreamHandler()
        console_handler.setFormatter(formatter)
        console_handler._switchhom = True  # type: ignore[attr-defined]
        root.addHandler(console_handler)

    root.setLevel(level)
    return logging.getLogger(name)


def read_recent_logs(max_lines: int = 200) -> str:
    """Return the last *max_lines* lines from the log file."""

    path = log_path()
    if not path.exists():
        return "Log file not created yet. Run a command to generate entries."

    try:
        with path.open("r", encoding="utf-8", errors="ignore") as fh:
            lines = fh.readlines()
    except OSError as exc:
        return f"Unable to read log file: {exc}"

    tail = lines[-max_lines:]
    return "".join(tail).strip() or "Log file is currently empty."
