"""Base value types for the tedium spectral-element package.

This module provides the two foundations every domain object inherits from.
BaseType wraps a single validated value (nodal arrays); FrozenRecord groups
several named fields (rules, operators, plans, configurations). Both enforce
immutability after construction and run validation before anything is
stored.
"""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod
from typing import Any, Dict, Generic, Tuple, TypeVar

import numpy as np

from tedium.sem.core.exceptions import (
    ImmutabilityError,
    ValidationError,
)

T = TypeVar("T")
R = TypeVar("R", bound="FrozenRecord")


def values_equal(left: Any, right: Any) -> bool:
    """Compare two stored values, treating arrays by shape and content.

    Args:
        left: First value
        right: Second value

    Returns:
        True if both values hold the same data
    """
    if isinstance(left, np.ndarray) or isinstance(right, np.ndarray):
        if not (isinstance(left, np.ndarray) and isinstance(right, np.ndarray)):
            return False
        return left.shape == right.shape and bool(np.array_equal(left, right))
    if isinstance(left, tuple) and isinstance(right, tuple):
        return len(left) == len(right) and all(values_equal(a, b) for a, b in zip(left, right))
    return bool(left == right)


def frozen_array(values: Any, *, order: str = "C") -> np.ndarray:
    """Copy values into a read-only float64 array.

    Args:
        values: Array-like input
        order: Memory order of the copy ("C" or "F")

    Returns:
        A private, non-writeable float64 array
    """
    array = np.array(values, dtype=np.float64, order=order, copy=True)
    array.setflags(write=False)
    return array


class BaseType(Generic[T], ABC):
    """Base class for single-value types.

    The wrapped value is validated once and cannot be replaced afterwards.
    """

    _value: T

    def __init__(self, value: T) -> None:
        self.validate(value)
        object.__setattr__(self, "_value", value)

    @abstractmethod
    def validate(self, value: T) -> None:
        """Validate the value before storing it.

        Args:
            value: The value to validate

        Raises:
            ValidationError: If validation fails
        """
        if value is None:
            raise ValidationError("Value cannot be None", value=value)

    @property
    def value(self) -> T:
        """Get the wrapped value."""
        return self._value

    def __setattr__(self, name: str, value: Any) -> None:
        """Prevent attribute modification after initialization.

        Raises:
            ImmutabilityError: Always; values are fixed at construction
        """
        raise ImmutabilityError(
            f"Cannot modify {name} after initialization",
            attribute=name
        )

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self._value!r})"

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, type(self)):
            return NotImplemented
        return values_equal(self._value, other._value)

    __hash__ = None  # type: ignore[assignment]

    def __copy__(self) -> BaseType[T]:
        return self.__class__(self._value)

    def __deepcopy__(self, memo: Dict[int, Any]) -> BaseType[T]:
        return self.__class__(copy.deepcopy(self._value, memo))


class FrozenRecord(ABC):
    """Base class for immutable multi-field value objects.

    Subclasses list their field names in ``_fields`` and pass every field as
    a keyword argument to ``FrozenRecord.__init__``; ``validate`` runs once
    all fields are stored.
    """

    _fields: Tuple[str, ...] = ()

    def __init__(self, **fields: Any) -> None:
        missing = [name for name in self._fields if name not in fields]
        unknown = [name for name in fields if name not in self._fields]
        if missing or unknown:
            raise ValidationError(
                f"{self.__class__.__name__} fields do not match",
                value=sorted(fields),
                missing=missing,
                unknown=unknown,
            )
        for name in self._fields:
            object.__setattr__(self, name, fields[name])
        self.validate()

    @abstractmethod
    def validate(self) -> None:
        """Check the record invariants.

        Raises:
            ValidationError: If an invariant does not hold
        """

    def __setattr__(self, name: str, value: Any) -> None:
        raise ImmutabilityError(
            f"Cannot modify {name} after initialization",
            attribute=name
        )

    def as_dict(self) -> Dict[str, Any]:
        """Return the fields as a new dict."""
        return {name: getattr(self, name) for name in self._fields}

    def replace(self: R, **changes: Any) -> R:
        """Create a validated copy with some fields changed.

        Args:
            **changes: Field values to override

        Returns:
            New record of the same type
        """
        fields = self.as_dict()
        fields.update(changes)
        return type(self)(**fields)

    def __eq__(self, other: Any) -> bool:
        if not isinstance(other, type(self)):
            return NotImplemented
        return all(values_equal(getattr(self, name), getattr(other, name)) for name in self._fields)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        parts = []
        for name in self._fields:
            value = getattr(self, name)
            if isinstance(value, np.ndarray):
                parts.append(f"{name}=<array {value.shape}>")
            else:
                parts.append(f"{name}={value!r}")
        return f"{self.__class__.__name__}({', '.join(parts)})"
