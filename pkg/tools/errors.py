"""
Shared exception hierarchy for the impairment toolkit.

Every sub-package raises one of these so the CLI can map failures to
its exit-code contract (1 validation, 2 numerical, 3 I/O).
"""

from typing import Iterable, List, Optional, Tuple

import numpy as np


class ToolkitError(Exception):
    """Base error for the toolkit."""
    pass


class ParameterError(ToolkitError, ValueError):
    """
    Invalid arguments or parameter records.

    Attributes:
        violations: (locator, message) pairs, one per violated invariant
    """

    def __init__(self, message: str, violations: Optional[Iterable[Tuple[str, str]]] = None):
        self.violations: List[Tuple[str, str]] = list(violations or [])
        if self.violations and not message:
            message = "; ".join(f"{loc}: {msg}" for loc, msg in self.violations)
        super().__init__(message)

    @classmethod
    def from_violations(cls, record: str, violations: List[Tuple[str, str]]) -> "ParameterError":
        """Build one error naming every violated field of a record."""
        details = "; ".join(f"{loc}: {msg}" for loc, msg in violations)
        return cls(f"Invalid {record}: {details}", violations)


class DomainError(ParameterError):
    """Mathematical domain violation (e.g. dB of a non-positive value)."""
    pass


class ConfigurationError(ParameterError):
    """Inconsistent experiment or link setup."""
    pass


class NumericalError(ToolkitError, ArithmeticError):
    """Numerical failure: singular evaluation, rank deficiency."""
    pass


class EstimationError(NumericalError):
    """An estimator has nothing to estimate from."""
    pass


class ConfigIOError(ToolkitError, OSError):
    """Unreadable or corrupt configuration file."""
    pass


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def exit_code_for(error: BaseException) -> int:
    """Process exit code for an exception escaping a command."""
    if isinstance(error, ParameterError):
        return EXIT_VALIDATION
    if isinstance(error, (ArithmeticError, np.linalg.LinAlgError)):
        return EXIT_NUMERICAL
    if isinstance(error, OSError):
        return EXIT_IO
    return EXIT_NUMERICAL


def raise_if_violations(record: str, violations: List[Tuple[str, str]]) -> None:
    """Raise a ParameterError listing all violations, if any."""
    if violations:
        raise ParameterError.from_violations(record, violations)
