"""
Custom exceptions for the shape scaling toolkit.

This module defines exception classes for the different ways a cost query,
a fit, a sweep design or a scaling plan can fail.
"""

from typing import Any, List, Optional


class ShapeScalingError(Exception):
    """Base exception for shape scaling errors."""

    def __init__(self, message: str) -> None:
        super().__init__(message)
        self.message = message


class InputValidationError(ShapeScalingError, ValueError):
    """Raised when an input violates a documented invariant."""

    def __init__(self, message: str, invariant: Optional[str] = None) -> None:
        super().__init__(message)
        self.invariant = invariant


class DomainError(InputValidationError):
    """Raised when a power law is evaluated outside the positive reals."""

    def __init__(self, name: str, value: Any) -> None:
        message = f"{name} must be strictly positive, got {value!r}"
        super().__init__(message, invariant=f"{name} > 0")
        self.name = name
        self.value = value


class RecordFormatError(InputValidationError):
    """Raised when a run record file row cannot be parsed."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        invariant: Optional[str] = None,
    ) -> None:
        location = path or "<stream>"
        if line is not None:
            location = f"{location}:{line}"
        super().__init__(f"{location}: {message}", invariant=invariant)
        self.path = path
        self.line = line


class InfeasibleDesignError(ShapeScalingError):
    """Raised when a sweep design or compute budget cannot be realised."""

    def __init__(self, message: str, dimension: Optional[str] = None) -> None:
        super().__init__(message)
        self.dimension = dimension


class NonConvergenceError(ShapeScalingError):
    """Raised when every optimizer restart failed to produce a finite fit."""

    def __init__(
        self,
        message: str,
        best_params: Any = None,
        objective_value: Optional[float] = None,
    ) -> None:
        super().__init__(message)
        self.best_params = best_params
        self.objective_value = objective_value


class ConfigurationError(ShapeScalingError):
    """Raised when configuration loading or validation fails."""

    def __init__(
        self,
        message: str,
        config_path: Optional[str] = None,
        validation_errors: Optional[List[str]] = None,
    ) -> None:
        super().__init__(message)
        self.config_path = config_path
        self.validation_errors = validation_errors or []
