"""Manufactured solutions: separable fields with exact Laplacians and a
Cahn-Hilliard solution with its source term."""

from __future__ import annotations

from typing import Callable, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from numpy.polynomial import Polynomial

from tedium.sem.core.base import FrozenRecord
from tedium.sem.core.exceptions import InvalidSpecError
from tedium.sem.tensor.grid import NodalArray, grid_for, mesh_coordinates

Array = npt.NDArray[np.float64]
Function1D = Callable[[Array], Array]


class Factor1D(FrozenRecord):
    """A 1D function together with its second derivative."""

    _fields = ("value", "second", "label")

    value: Function1D
    second: Function1D
    label: str

    def __init__(self, *, value: Function1D, second: Function1D, label: str) -> None:
        super().__init__(value=value, second=second, label=label)

    def validate(self) -> None:
        if not callable(self.value) or not callable(self.second):
            raise InvalidSpecError("factor", self.label, "value and second derivative must be callable")

    @classmethod
    def sine(cls, k: float) -> Factor1D:
        w = k * np.pi
        return cls(value=lambda x: np.sin(w * x), second=lambda x: -(w ** 2) * np.sin(w * x), label=f"sin({k:g}pi x)")

    @classmethod
    def cosine(cls, k: float) -> Factor1D:
        w = k * np.pi
        return cls(value=lambda x: np.cos(w * x), second=lambda x: -(w ** 2) * np.cos(w * x), label=f"cos({k:g}pi x)")

    @classmethod
    def polynomial(cls, poly: Polynomial) -> Factor1D:
        """Polynomial factor; the second derivative is exact."""
        second = poly.deriv(2)
        return cls(value=lambda x: poly(x), second=lambda x: second(x), label=str(poly))


class SeparableField(FrozenRecord):
    """u = sum over terms of prod_d f_{term,d}(x_d)."""

    _fields = ("terms",)

    terms: Tuple[Tuple[Factor1D, ...], ...]

    def __init__(self, *, terms: Sequence[Sequence[Factor1D]]) -> None:
        super().__init__(terms=tuple(tuple(term) for term in terms))

    def validate(self) -> None:
        if not self.terms:
            raise InvalidSpecError("terms", self.terms, "need at least one term")
        dims = {len(term) for term in self.terms}
        if len(dims) != 1 or not dims <= {2, 3}:
            raise InvalidSpecError("terms", sorted(dims), "every term needs 2 or 3 factors")

    @property
    def dim(self) -> int:
        return len(self.terms[0])

    def _coords(self, nodes: Sequence[npt.ArrayLike]) -> Tuple[Array, ...]:
        if len(nodes) != self.dim:
            raise InvalidSpecError("nodes", len(nodes), f"field is {self.dim}D")
        return mesh_coordinates(nodes)

    def values(self, nodes: Sequence[npt.ArrayLike]) -> NodalArray:
        """Nodal values u(x_i, y_j[, z_k])."""
        coords = self._coords(nodes)
        total = np.zeros(coords[0].shape)
        for term in self.terms:
            product = np.ones_like(total)
            for factor, x in zip(term, coords):
                product *= factor.value(x)
            total += product
        return grid_for(total)

    def laplacian(self, nodes: Sequence[npt.ArrayLike]) -> NodalArray:
        """Nodal values of the exact Laplacian."""
        coords = self._coords(nodes)
        total = np.zeros(coords[0].shape)
        for term in self.terms:
            for d in range(self.dim):
                product = np.ones_like(total)
                for e, (factor, x) in enumerate(zip(term, coords)):
                    product *= factor.second(x) if e == d else factor.value(x)
                total += product
        return grid_for(total)

    def forcing(self, nodes: Sequence[npt.ArrayLike], alpha: float) -> NodalArray:
        """f = alpha u - Delta u."""
        return alpha * self.values(nodes) - self.laplacian(nodes)


def _check_dim(dim: int) -> None:
    if dim not in (2, 3):
        raise InvalidSpecError("dim", dim, "must be 2 or 3")


def dirichlet_solution(dim: int = 3) -> SeparableField:
    """sin(pi x) sin(2 pi y) sin(3 pi z) + (x - x^3)(y^2 - y^4)(1 - z^2), zero on the boundary of [-1, 1]^d."""
    _check_dim(dim)
    trig = [Factor1D.sine(1), Factor1D.sine(2), Factor1D.sine(3)]
    poly = [
        Factor1D.polynomial(Polynomial([0.0, 1.0, 0.0, -1.0])),
        Factor1D.polynomial(Polynomial([0.0, 0.0, 1.0, 0.0, -1.0])),
        Factor1D.polynomial(Polynomial([1.0, 0.0, -1.0])),
    ]
    return SeparableField(terms=[trig[:dim], poly[:dim]])


def neumann_solution(dim: int = 3) -> SeparableField:
    """cos(pi x) cos(2 pi y) cos(3 pi z) + (1 - x^2)^3 (1 - y^2)^2 (1 - z^2)^4, zero normal derivative on [-1, 1]^d."""
    _check_dim(dim)
    base = Polynomial([1.0, 0.0, -1.0])
    trig = [Factor1D.cosine(1), Factor1D.cosine(2), Factor1D.cosine(3)]
    poly = [Factor1D.polynomial(base ** 3), Factor1D.polynomial(base ** 2), Factor1D.polynomial(base ** 4)]
    return SeparableField(terms=[trig[:dim], poly[:dim]])


def sine_product(dim: int = 3) -> SeparableField:
    """prod_d sin(pi x_d)."""
    _check_dim(dim)
    return SeparableField(terms=[[Factor1D.sine(1)] * dim])


class PhaseFieldSolution(FrozenRecord):
    """phi(x, t) = e^t prod_d cos(pi x_d) with its Cahn-Hilliard source.

    The normal derivatives of phi and Delta phi vanish on the boundary of
    [-1, 1]^d, so it solves the Neumann problem

        phi_t = m Delta(-eps Delta phi + (phi^3 - phi) / eps) + f

    for the f returned by :meth:`forcing`.
    """

    _fields = ("dim",)

    dim: int

    def __init__(self, *, dim: int) -> None:
        super().__init__(dim=dim)

    def validate(self) -> None:
        _check_dim(self.dim)

    def _coords(self, nodes: Sequence[npt.ArrayLike]) -> Tuple[Array, ...]:
        if len(nodes) != self.dim:
            raise InvalidSpecError("nodes", len(nodes), f"field is {self.dim}D")
        return mesh_coordinates(nodes)

    def values(self, nodes: Sequence[npt.ArrayLike], t: float) -> NodalArray:
        coords = self._coords(nodes)
        product = np.full(coords[0].shape, np.exp(t))
        for x in coords:
            product *= np.cos(np.pi * x)
        return grid_for(product)

    def forcing(self, nodes: Sequence[npt.ArrayLike], eps: float, mobility: float) -> Callable[[float], Array]:
        """Source f(t) on the nodes for interface width eps and mobility m.

        With C = prod cos(pi x_d): Delta C = -d pi^2 C, Delta^2 C = d^2 pi^4 C,
        and Delta(C^3) = sum_d g''(x_d) prod_{e != d} cos^3(pi x_e) with
        g'' = pi^2 (6 cos - 9 cos^3).
        """
        if not eps > 0.0 or not mobility > 0.0:
            raise InvalidSpecError("eps", (eps, mobility), "eps and mobility must be > 0")
        coords = self._coords(nodes)
        cosines = [np.cos(np.pi * x) for x in coords]
        base = np.ones(coords[0].shape)
        for c in cosines:
            base = base * c
        cube_laplacian = np.zeros_like(base)
        for d in range(self.dim):
            term = np.pi ** 2 * (6.0 * cosines[d] - 9.0 * cosines[d] ** 3)
            for e in range(self.dim):
                if e != d:
                    term = term * cosines[e] ** 3
            cube_laplacian += term
        dim = self.dim
        linear = 1.0 + mobility * eps * dim ** 2 * np.pi ** 4 - (mobility / eps) * dim * np.pi ** 2

        def source(t: float) -> Array:
            result: Array = linear * np.exp(t) * base - (mobility / eps) * np.exp(3.0 * t) * cube_laplacian
            return result

        return source


def phase_field_solution(dim: int = 2) -> PhaseFieldSolution:
    """e^t prod_d cos(pi x_d) on [-1, 1]^d."""
    return PhaseFieldSolution(dim=dim)
