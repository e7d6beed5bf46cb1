"""
Structured logging setup and the diagnostics channel
Diagnostics rows are collected in memory and written as CSV by the front-end
"""

import logging
import sys
from typing import Any, Dict, List, Optional

import pandas as pd
import structlog

logger = structlog.get_logger(__name__)


def setup_logging(level: str = "INFO", quiet: bool = False) -> None:
    """Configure structlog for key-value rendering on stderr"""
    threshold = logging.WARNING if quiet else getattr(logging, level.upper(), logging.INFO)
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.KeyValueRenderer(key_order=["timestamp", "level", "event"]),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(threshold),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    logger.debug("Logging configured", level=level, quiet=quiet)


class DiagnosticsLog:
    """In-memory diagnostics channel shared by the modules of one run"""

    def __init__(self):
        self.rows: List[Dict[str, Any]] = []

    def record(self, channel: str, event: str, **fields: Any) -> None:
        """Append one diagnostics row"""
        row: Dict[str, Any] = {"channel": channel, "event": event}
        row.update(fields)
        self.rows.append(row)

    def warnings(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row["event"].endswith("warning")]

    def to_frame(self) -> pd.DataFrame:
        """Rows as a frame, columns in first-seen order"""
        columns: List[str] = []
        for row in self.rows:
            for key in row:
                if key not in columns:
                    columns.append(key)
        return pd.DataFrame(self.rows, columns=columns or ["channel", "event"])


def record(diagnostics: Optional[DiagnosticsLog], channel: str, event: str, **fields: Any) -> None:
    """Record on an optional channel"""
    if diagnostics is not None:
        diagnostics.record(channel, event, **fields)
