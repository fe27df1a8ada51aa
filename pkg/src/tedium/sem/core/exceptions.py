"""Core exceptions for the tedium spectral-element package.

This module defines the exception hierarchy used throughout the package.
All custom exceptions inherit from SpectralError to allow catching every
solver-related error with a single except clause. Each exception carries a
``context`` dict so the command line can report failures as one
machine-readable line.
"""

from typing import Any, Dict, Tuple


class SpectralError(Exception):
    """Base exception for all spectral-element errors."""

    context: Dict[str, Any]

    def __init__(self, message: str, **context: Any) -> None:
        """Initialize with message and optional context.

        Args:
            message: The error message
            **context: Additional context about the error
        """
        super().__init__(message)
        self.context = context


class ValidationError(SpectralError):
    """Raised when an input value fails validation."""

    value: Any

    def __init__(self, message: str, value: Any, **context: Any) -> None:
        """Initialize with invalid value information.

        Args:
            message: The validation error message
            value: The invalid value
            **context: Additional validation context
        """
        super().__init__(message, value=value, **context)
        self.value = value


class ConversionError(SpectralError):
    """Raised when a value cannot be converted to the target type."""

    value: Any
    target_type: type

    def __init__(self, message: str, value: Any, target_type: type, **context: Any) -> None:
        """Initialize with conversion details.

        Args:
            message: The conversion error message
            value: The value that couldn't be converted
            target_type: The type we tried to convert to
            **context: Additional conversion context
        """
        super().__init__(message, value=value, target_type=target_type, **context)
        self.value = value
        self.target_type = target_type


class OperationError(SpectralError):
    """Raised when an operation cannot be performed."""

    operation: str

    def __init__(self, message: str, operation: str, **context: Any) -> None:
        """Initialize with operation details.

        Args:
            message: The operation error message
            operation: The name of the failed operation
            **context: Additional operation context
        """
        super().__init__(message, operation=operation, **context)
        self.operation = operation


class ImmutabilityError(OperationError):
    """Raised when attempting to modify an immutable value."""

    attribute: str

    def __init__(self, message: str, attribute: str, **context: Any) -> None:
        """Initialize with immutability violation details.

        Args:
            message: The immutability error message
            attribute: The attribute that was attempted to be modified
            **context: Additional context
        """
        super().__init__(message, operation="modify", attribute=attribute, **context)
        self.attribute = attribute


class InternalError(SpectralError):
    """Raised when a numerical kernel fails in a way callers cannot fix."""


# Validation failures
class InvalidSpecError(ValidationError):
    """Raised when a mesh or run specification is out of range."""

    def __init__(self, field: str, value: Any, reason: str, **context: Any) -> None:
        """Initialize with the offending field.

        Args:
            field: Name of the invalid field
            value: The invalid value
            reason: Short description of the violated constraint
            **context: Additional validation context
        """
        message = f"Invalid {field}={value!r}: {reason}"
        super().__init__(message, value, field=field, **context)
        self.field = field


class InvalidOperatorError(ValidationError):
    """Raised when an assembled operator violates its structural invariants."""


class PreconditionError(ValidationError):
    """Raised when an operation input violates a documented precondition."""


class ConfigError(ValidationError):
    """Raised when command-line or file configuration cannot be used."""


# Operation failures
class ShapeError(OperationError):
    """Raised when array dimensions do not agree."""

    expected: Tuple[int, ...]
    actual: Tuple[int, ...]

    def __init__(self, operation: str, expected: Tuple[int, ...], actual: Tuple[int, ...], **context: Any) -> None:
        """Initialize with the mismatching shapes.

        Args:
            operation: The operation that received the array
            expected: The shape the operation needs
            actual: The shape it received
            **context: Additional operation context
        """
        message = f"{operation}: expected shape {tuple(expected)}, got {tuple(actual)}"
        super().__init__(message, operation, expected=tuple(expected), actual=tuple(actual), **context)
        self.expected = tuple(expected)
        self.actual = tuple(actual)


class SingularOperatorError(OperationError):
    """Raised when a plan meets zero modes under the reject policy."""

    def __init__(self, zero_modes: int, alpha: float, **context: Any) -> None:
        """Initialize with the number of detected zero modes.

        Args:
            zero_modes: Count of (near) zero denominators
            alpha: The shift that was requested
            **context: Additional operation context
        """
        message = f"Operator is singular: {zero_modes} zero mode(s) at alpha={alpha}"
        super().__init__(message, "plan", zero_modes=zero_modes, alpha=alpha, **context)
        self.zero_modes = zero_modes


class PlanningError(OperationError):
    """Raised when a diagonal symbol produces non-finite multipliers."""

    def __init__(self, bad_entries: int, **context: Any) -> None:
        """Initialize with the number of non-finite multiplier entries.

        Args:
            bad_entries: Count of non-finite symbol values
            **context: Additional operation context
        """
        message = f"Symbol is not finite on {bad_entries} eigenvalue sum(s)"
        super().__init__(message, "plan", bad_entries=bad_entries, **context)
        self.bad_entries = bad_entries


class BlowUpError(OperationError):
    """Raised when a time stepper produces non-finite values."""

    def __init__(self, step: int, **context: Any) -> None:
        """Initialize with the failing step index.

        Args:
            step: Index of the step whose result is not finite
            **context: Additional operation context
        """
        message = f"Non-finite phase field at step {step}"
        super().__init__(message, "step", step=step, **context)
        self.step = step


class OutputError(OperationError):
    """Raised when a result file or directory cannot be written."""

    def __init__(self, path: str, reason: str, **context: Any) -> None:
        """Initialize with the target path.

        Args:
            path: File or directory that could not be written
            reason: Description from the underlying OS error
            **context: Additional operation context
        """
        message = f"Cannot write {path}: {reason}"
        super().__init__(message, "write", path=path, **context)
        self.path = path


# Internal failures
class QuadratureError(InternalError):
    """Raised when Gauss-Lobatto root finding does not converge."""


class EigensolverError(InternalError):
    """Raised when the symmetric eigensolver fails."""
