"""Color-coded console logging and JSON lines, both stamped with the current run."""

import json
import logging
import sys
from datetime import datetime, timezone
from typing import Any, Optional

COLORS = {
    "DATA": "\033[36m",
    "MODEL": "\033[34m",
    "TRAIN": "\033[32m",
    "EVAL": "\033[35m",
    "CLI": "\033[96m",
    "CORE": "\033[37m",
    "CONFIG": "\033[90m",
    "RUN": "\033[2m",
    "ERROR": "\033[31m",
    "WARNING": "\033[33m",
    "RESET": "\033[0m",
}

# Most specific prefix first
PACKAGE_NAMES = (
    ("segcause.main", "CLI"),
    ("segcause.cli", "CLI"),
    ("segcause.config", "CONFIG"),
    ("segcause.data", "DATA"),
    ("segcause.model", "MODEL"),
    ("segcause.training", "TRAIN"),
    ("segcause.evaluation", "EVAL"),
    ("segcause.explainers", "EVAL"),
)

# Command and seed of the active CLI run; empty outside a run
_run_context: dict[str, Any] = {}


def get_package_name(logger_name: str) -> str:
    """Package tag for a logger name (CORE for anything unlisted)."""
    for prefix, name in PACKAGE_NAMES:
        if logger_name == prefix or logger_name.startswith(prefix + "."):
            return name
    return "CORE"


def set_run_context(command: Optional[str] = None, seed: Optional[int] = None) -> None:
    """Stamp later records with the running command and seed; no arguments clears it."""
    _run_context.clear()
    if command is not None:
        _run_context["command"] = command
    if seed is not None:
        _run_context["seed"] = int(seed)


def run_context() -> dict[str, Any]:
    return dict(_run_context)


class RunContextFilter(logging.Filter):
    """Copies the run context onto each record as ``record.run``."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run = run_context()
        return True


def _run_label(record: logging.LogRecord) -> str:
    run = getattr(record, "run", None) or {}
    if "command" not in run:
        return ""
    seed = f" s{run['seed']}" if "seed" in run else ""
    return f"({run['command']}{seed})"


class ColoredFormatter(logging.Formatter):
    """``[PKG] (command sN) message`` with optional ANSI colors."""

    def __init__(self, use_colors: bool = True):
        super().__init__("%(message)s")
        self.use_colors = use_colors and sys.stderr.isatty()

    def _paint(self, key: str, text: str) -> str:
        if not self.use_colors:
            return text
        return f"{COLORS[key]}{text}{COLORS['RESET']}"

    def format(self, record: logging.LogRecord) -> str:
        package = get_package_name(record.name)
        parts = [self._paint(package, f"[{package}]")]
        label = _run_label(record)
        if label:
            parts.append(self._paint("RUN", label))
        if record.levelno >= logging.ERROR:
            parts.append(self._paint("ERROR", "[ERROR]"))
        elif record.levelno >= logging.WARNING:
            parts.append(self._paint("WARNING", "[WARN]"))
        parts.append(record.getMessage())
        line = " ".join(parts)
        if record.exc_info:
            line = f"{line}\n{self.formatException(record.exc_info)}"
        return line


class JSONFormatter(logging.Formatter):
    """One JSON object per record.

    The run context becomes top-level ``command``/``seed`` keys, and a
    ``metrics`` mapping passed through ``extra`` is merged under ``metrics``.
    """

    def format(self, record: logging.LogRecord) -> str:
        entry: dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "level": record.levelname,
            "package": get_package_name(record.name),
            "message": record.getMessage(),
        }
        entry.update(getattr(record, "run", None) or {})
        metrics = getattr(record, "metrics", None)
        if metrics:
            entry["metrics"] = {k: float(v) for k, v in metrics.items()}
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry)


_logging_initialized = False


def _level(name: str) -> int:
    level = logging.getLevelName(name.upper())
    if not isinstance(level, int):
        raise ValueError(f"unknown log level: {name}")
    return level


def setup_logging(
    level: str = "INFO",
    use_colors: bool = True,
    json_format: bool = False,
    log_file: Optional[str] = None,
    force: bool = False,
) -> None:
    """Configure the root logger.

    Args:
        level: DEBUG, INFO, WARNING or ERROR
        use_colors: Color the console output when stderr is a terminal
        json_format: Emit JSON lines on the console instead
        log_file: Also append JSON lines to this file
        force: Reconfigure even if already initialized
    """
    global _logging_initialized

    if _logging_initialized and not force:
        return

    numeric = _level(level)
    root_logger = logging.getLogger()
    root_logger.setLevel(numeric)
    for handler in root_logger.handlers:
        handler.close()
    root_logger.handlers = []

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(
        JSONFormatter() if json_format else ColoredFormatter(use_colors=use_colors)
    )
    handlers: list[logging.Handler] = [console_handler]
    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(JSONFormatter())
        handlers.append(file_handler)

    for handler in handlers:
        handler.setLevel(numeric)
        handler.addFilter(RunContextFilter())
        root_logger.addHandler(handler)

    _logging_initialized = True


def get_logger(name: str) -> logging.Logger:
    return logging.getLogger(name)
