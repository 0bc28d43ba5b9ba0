"""
Structured Logging

JSON-lines log records for every kmmeans module. Context travels through the
standard `extra=` mechanism; known keys are lifted into the JSON entry.
"""

import json
import logging
import uuid
from datetime import datetime, timezone
from typing import Optional

from kmmeans.settings import settings

CONTEXT_FIELDS = (
    "run_id",
    "seed",
    "k",
    "n_inits",
    "init_index",
    "method",
    "objective",
    "duration_ms",
    "rows",
    "command",
)


class StructuredFormatter(logging.Formatter):
    def format(self, record):
        log_entry = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "service": "kmmeans",
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        for key in CONTEXT_FIELDS:
            if hasattr(record, key):
                log_entry[key] = getattr(record, key)
        if record.exc_info:
            log_entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(log_entry, default=str)


def get_logger(name: str) -> logging.Logger:
    """Return a logger emitting structured JSON to stderr."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(StructuredFormatter())
        logger.addHandler(handler)
        logger.setLevel(settings.log_level)
        logger.propagate = False
    return logger


def set_level(level: str) -> None:
    """Apply a level to every kmmeans logger created so far."""
    for name in list(logging.root.manager.loggerDict):
        if name == "kmmeans" or name.startswith("kmmeans."):
            logging.getLogger(name).setLevel(level)


def generate_run_id() -> str:
    """Generate a unique run ID for tracing a fit or command across log lines"""
    return f"run_{uuid.uuid4().hex[:12]}"


def elapsed_ms(start: datetime, end: Optional[datetime] = None) -> int:
    end = end or datetime.now()
    return int((end - start).total_seconds() * 1000)
