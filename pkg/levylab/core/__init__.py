"""
Cross-cutting infrastructure: configuration, errors, logging, export
"""

from .config import Settings, get_settings
from .errors import (
    BlowUpError,
    ConfigurationError,
    DomainError,
    ExitCode,
    InvariantViolation,
    LevyLabError,
    NonConvergenceError,
    UsageError,
)
from .monitoring import DiagnosticsLog, setup_logging

__all__ = [
    "Settings",
    "get_settings",
    "ExitCode",
    "LevyLabError",
    "ConfigurationError",
    "UsageError",
    "InvariantViolation",
    "NonConvergenceError",
    "BlowUpError",
    "DomainError",
    "DiagnosticsLog",
    "setup_logging",
]
