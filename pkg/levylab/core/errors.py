"""
Exception hierarchy and process exit codes
"""

from enum import IntEnum
from typing import Any, Dict, List, Optional, Sequence


class ExitCode(IntEnum):
    """Process exit codes of the command-line front-end"""
    OK = 0
    VIOLATION = 1
    CONFIGURATION = 2
    SOLVER = 3


class LevyLabError(Exception):
    """Base class for all levylab errors"""

    exit_code: ExitCode = ExitCode.SOLVER

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.message = message
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "message": self.message, **self.context}


class ConfigurationError(LevyLabError):
    """Invalid problem data or experiment document"""

    exit_code = ExitCode.CONFIGURATION

    def __init__(self, message: str, problems: Optional[Sequence[str]] = None, **context: Any):
        self.problems: List[str] = list(problems or [])
        if self.problems:
            message = message + ": " + "; ".join(self.problems)
        super().__init__(message, **context)


class UsageError(LevyLabError):
    """An operation was called with inconsistent arguments"""

    exit_code = ExitCode.CONFIGURATION


class InvariantViolation(LevyLabError):
    """A hard invariant of the theory failed on the discrete solution"""

    exit_code = ExitCode.VIOLATION


class NonConvergenceError(LevyLabError):
    """Stationary solve exhausted its step budget"""

    exit_code = ExitCode.SOLVER

    def __init__(self, message: str, residual: float, history: Sequence[float] = (),
                 partial: Optional[Any] = None, **context: Any):
        super().__init__(message, residual=residual, **context)
        self.residual = residual
        self.history: List[float] = list(history)
        self.partial = partial


class BlowUpError(LevyLabError):
    """Time marching produced a non-finite state"""

    exit_code = ExitCode.SOLVER

    def __init__(self, message: str, step: int, **context: Any):
        super().__init__(message, step=step, **context)
        self.step = step


class DomainError(LevyLabError):
    """Arguments outside the numerically representable range"""

    exit_code = ExitCode.SOLVER
