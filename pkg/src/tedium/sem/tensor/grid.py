"""Nodal arrays on tensor-product GLL node sets.

Grid2 and Grid3 wrap a read-only float64 array stored x-fastest (Fortran
order), so entry (i, j, k) of a Grid3 sits at flat index
i + Nx*j + Nx*Ny*k of ``vec()``.
"""

from __future__ import annotations

from typing import Any, ClassVar, Sequence, Tuple, Type, TypeVar

import numpy as np
import numpy.typing as npt

from tedium.sem.core.base import BaseType
from tedium.sem.core.exceptions import ShapeError, ValidationError

G = TypeVar("G", bound="NodalArray")


class NodalArray(BaseType[npt.NDArray[np.float64]]):
    """Immutable nodal values of fixed dimension."""

    ndim: ClassVar[int] = 0

    def __init__(self, values: npt.ArrayLike) -> None:
        """Copy values into a read-only x-fastest float64 array.

        Args:
            values: Array-like of dimension ``ndim``

        Raises:
            ValidationError: If the dimension is wrong or a value is not finite
        """
        if values is None:
            raise ValidationError("Value cannot be None", value=values)
        array = np.array(values, dtype=np.float64, order="F", copy=True)
        array.setflags(write=False)
        super().__init__(array)

    def validate(self, value: npt.NDArray[np.float64]) -> None:
        super().validate(value)
        if value.ndim != self.ndim:
            raise ValidationError(
                f"{self.__class__.__name__} needs a {self.ndim}D array, got {value.ndim}D",
                value=value.shape,
            )
        if not np.all(np.isfinite(value)):
            raise ValidationError(
                f"{self.__class__.__name__} values must be finite",
                value=int(np.count_nonzero(~np.isfinite(value))),
            )

    @classmethod
    def zeros(cls: Type[G], dims: Sequence[int]) -> G:
        """Grid of zeros with the given dims."""
        return cls(np.zeros(tuple(dims)))

    @classmethod
    def full(cls: Type[G], dims: Sequence[int], fill: float) -> G:
        """Grid holding one constant value."""
        return cls(np.full(tuple(dims), float(fill)))

    @classmethod
    def from_vec(cls: Type[G], vec: npt.ArrayLike, dims: Sequence[int]) -> G:
        """Rebuild a grid from its x-fastest flat vector."""
        flat = np.asarray(vec, dtype=np.float64)
        if flat.size != int(np.prod(dims)):
            raise ShapeError("from_vec", (int(np.prod(dims)),), flat.shape)
        return cls(flat.reshape(tuple(dims), order="F"))

    @property
    def values(self) -> npt.NDArray[np.float64]:
        """The read-only array."""
        return self._value

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(int(n) for n in self._value.shape)

    @property
    def size(self) -> int:
        return int(self._value.size)

    def vec(self) -> npt.NDArray[np.float64]:
        """Flatten x-fastest."""
        result: npt.NDArray[np.float64] = self._value.ravel(order="F")
        return result

    def max_abs(self) -> float:
        return float(np.max(np.abs(self._value))) if self.size else 0.0

    def _operand(self, other: Any, operation: str) -> Any:
        if isinstance(other, NodalArray):
            if type(other) is not type(self):
                return NotImplemented
            if other.dims != self.dims:
                raise ShapeError(operation, self.dims, other.dims)
            return other._value
        if isinstance(other, (int, float, np.floating, np.integer)) and not isinstance(other, bool):
            return float(other)
        return NotImplemented

    def __add__(self: G, other: Any) -> G:
        operand = self._operand(other, "add")
        if operand is NotImplemented:
            return NotImplemented
        return type(self)(self._value + operand)

    __radd__ = __add__

    def __sub__(self: G, other: Any) -> G:
        operand = self._operand(other, "subtract")
        if operand is NotImplemented:
            return NotImplemented
        return type(self)(self._value - operand)

    def __rsub__(self: G, other: Any) -> G:
        operand = self._operand(other, "subtract")
        if operand is NotImplemented:
            return NotImplemented
        return type(self)(operand - self._value)

    def __mul__(self: G, other: Any) -> G:
        operand = self._operand(other, "multiply")
        if operand is NotImplemented:
            return NotImplemented
        return type(self)(self._value * operand)

    __rmul__ = __mul__

    def __truediv__(self: G, other: Any) -> G:
        if isinstance(other, NodalArray):
            return NotImplemented
        operand = self._operand(other, "divide")
        if operand is NotImplemented:
            return NotImplemented
        return type(self)(self._value / operand)

    def __neg__(self: G) -> G:
        return type(self)(-self._value)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(dims={self.dims})"


class Grid2(NodalArray):
    """Nodal values on an Nx x Ny tensor node set."""

    ndim = 2


class Grid3(NodalArray):
    """Nodal values on an Nx x Ny x Nz tensor node set."""

    ndim = 3


def grid_for(values: npt.ArrayLike) -> NodalArray:
    """Wrap a 2D or 3D array in the matching grid type."""
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 2:
        return Grid2(array)
    if array.ndim == 3:
        return Grid3(array)
    raise ValidationError(f"nodal arrays are 2D or 3D, got {array.ndim}D", value=array.shape)


def tensor_weights(masses: Sequence[npt.ArrayLike]) -> npt.NDArray[np.float64]:
    """Outer product of per-direction diagonal masses (tensor GLL weights)."""
    arrays = [np.asarray(m, dtype=np.float64) for m in masses]
    weights = arrays[0]
    for m in arrays[1:]:
        weights = np.multiply.outer(weights, m)
    result: npt.NDArray[np.float64] = np.asfortranarray(weights)
    return result


def _checked(u: NodalArray, weights: npt.NDArray[np.float64], operation: str) -> npt.NDArray[np.float64]:
    if u.dims != tuple(weights.shape):
        raise ShapeError(operation, tuple(weights.shape), u.dims)
    return u.values


def weighted_inner(u: NodalArray, v: NodalArray, weights: npt.NDArray[np.float64]) -> float:
    """Mass-weighted inner product sum(w * u * v)."""
    a = _checked(u, weights, "weighted_inner")
    b = _checked(v, weights, "weighted_inner")
    return float(np.sum(weights * a * b))


def weighted_l2(u: NodalArray, weights: npt.NDArray[np.float64]) -> float:
    """Quadrature-weighted discrete L2 norm sqrt(sum(w * u^2))."""
    a = _checked(u, weights, "weighted_l2")
    return float(np.sqrt(np.sum(weights * a * a)))


def weighted_mean(u: NodalArray, weights: npt.NDArray[np.float64]) -> float:
    """Quadrature-weighted mean sum(w * u) / sum(w)."""
    a = _checked(u, weights, "weighted_mean")
    return float(np.sum(weights * a) / np.sum(weights))


def mesh_coordinates(nodes: Sequence[npt.ArrayLike]) -> Tuple[npt.NDArray[np.float64], ...]:
    """Coordinate arrays of the tensor node set, one per direction (ij indexing)."""
    axes = [np.asarray(x, dtype=np.float64) for x in nodes]
    return tuple(np.asfortranarray(c) for c in np.meshgrid(*axes, indexing="ij"))
