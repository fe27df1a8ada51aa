"""Gauss-Lobatto-Legendre quadrature on the reference interval [-1, 1].

Provides Legendre polynomial evaluation by three-term recurrence, the
(k+1)-point GLL rule and the nodal Lagrange differentiation matrix built
from barycentric weights.
"""

from __future__ import annotations

import logging
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt

from tedium.sem.core.base import FrozenRecord, frozen_array
from tedium.sem.core.exceptions import InvalidSpecError, QuadratureError, ValidationError

logger = logging.getLogger(__name__)

FloatOrArray = Union[float, npt.NDArray[np.float64]]

NEWTON_MAX_ITERS = 200


class QuadRule(FrozenRecord):
    """A p-point Gauss-Lobatto-Legendre rule.

    Attributes:
        nodes: Ascending abscissae in [-1, 1], endpoints included
        weights: Positive quadrature weights summing to 2
    """

    _fields = ("nodes", "weights")

    nodes: npt.NDArray[np.float64]
    weights: npt.NDArray[np.float64]

    def __init__(self, *, nodes: npt.ArrayLike, weights: npt.ArrayLike) -> None:
        super().__init__(nodes=frozen_array(nodes), weights=frozen_array(weights))

    def validate(self) -> None:
        if self.nodes.ndim != 1 or self.nodes.shape != self.weights.shape:
            raise ValidationError("nodes and weights must be 1D of equal length", value=self.nodes.shape)
        if self.nodes.size < 2:
            raise ValidationError("a Lobatto rule needs at least 2 points", value=self.nodes.size)
        if np.any(np.diff(self.nodes) <= 0.0):
            raise ValidationError("nodes must be strictly ascending", value=self.nodes)
        if np.any(self.weights <= 0.0):
            raise ValidationError("weights must be positive", value=self.weights)

    @property
    def size(self) -> int:
        """Number of points p."""
        return int(self.nodes.size)

    def integrate(self, values: npt.ArrayLike) -> float:
        """Apply the rule to function values sampled at the nodes."""
        return float(np.dot(self.weights, np.asarray(values, dtype=np.float64)))


class DiffMatrix(FrozenRecord):
    """Nodal differentiation matrix, ``d[i, j] = l_j'(x_i)``."""

    _fields = ("d",)

    d: npt.NDArray[np.float64]

    def __init__(self, *, d: npt.ArrayLike) -> None:
        super().__init__(d=frozen_array(d))

    def validate(self) -> None:
        if self.d.ndim != 2 or self.d.shape[0] != self.d.shape[1]:
            raise ValidationError("differentiation matrix must be square", value=self.d.shape)

    def __matmul__(self, values: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
        result: npt.NDArray[np.float64] = self.d @ values
        return result


def legendre_eval(n: int, x: FloatOrArray) -> Tuple[FloatOrArray, FloatOrArray]:
    """Evaluate P_n and P_n' by the three-term recurrence.

    The derivative uses P_k' = P_{k-2}' + (2k-1) P_{k-1}, which stays finite
    at the endpoints.

    Args:
        n: Polynomial degree, n >= 0
        x: Point or array of points in [-1, 1]

    Returns:
        Tuple (P_n(x), P_n'(x)) with the shape of x

    Raises:
        InvalidSpecError: If n is negative
    """
    if n < 0:
        raise InvalidSpecError("n", n, "degree must be non-negative")
    xs = np.asarray(x, dtype=np.float64)
    p_prev, p_curr = np.ones_like(xs), xs.copy()
    dp_prev, dp_curr = np.zeros_like(xs), np.ones_like(xs)
    if n == 0:
        p_curr, dp_curr = p_prev, dp_prev
    for k in range(2, n + 1):
        p_next = ((2 * k - 1) * xs * p_curr - (k - 1) * p_prev) / k
        dp_next = dp_prev + (2 * k - 1) * p_curr
        p_prev, p_curr = p_curr, p_next
        dp_prev, dp_curr = dp_curr, dp_next
    if np.ndim(x) == 0:
        return float(p_curr), float(dp_curr)
    return p_curr, dp_curr


@lru_cache(maxsize=128)
def _gll_arrays(p: int) -> Tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    n = p - 1
    nodes = -np.cos(np.pi * np.arange(p) / n)
    interior = nodes[1:-1].copy()
    for iteration in range(NEWTON_MAX_ITERS):
        if interior.size == 0:
            break
        p_n, dp_n = legendre_eval(n, interior)
        # (1 - x^2) P_n'' = 2x P_n' - n(n+1) P_n
        d2p_n = (2.0 * interior * dp_n - n * (n + 1) * p_n) / (1.0 - interior ** 2)
        update = dp_n / d2p_n
        interior = interior - update
        # quadratic convergence: an update this small leaves round-off only
        if np.max(np.abs(update)) <= 1e-12:
            logger.debug("gll_rule(p=%d): Newton converged in %d iterations", p, iteration + 1)
            break
    else:
        raise QuadratureError(f"GLL Newton iteration did not converge for p={p}", p=p)
    nodes[1:-1] = interior
    nodes = 0.5 * (nodes - nodes[::-1])
    p_n, _ = legendre_eval(n, nodes)
    weights = 2.0 / (p * n * np.asarray(p_n) ** 2)
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def gll_rule(p: int) -> QuadRule:
    """Build the p-point Gauss-Lobatto-Legendre rule.

    Interior nodes are the roots of P'_{p-1}, found by Newton iteration
    started from the Chebyshev-Gauss-Lobatto points; the result is
    symmetrized about 0.

    Args:
        p: Number of points, p >= 2

    Returns:
        The quadrature rule

    Raises:
        InvalidSpecError: If p < 2
        QuadratureError: If Newton does not converge in 200 steps
    """
    if isinstance(p, bool) or not isinstance(p, int) or p < 2:
        raise InvalidSpecError("p", p, "a Gauss-Lobatto rule needs at least 2 points")
    nodes, weights = _gll_arrays(p)
    return QuadRule(nodes=nodes, weights=weights)


def barycentric_weights(nodes: npt.NDArray[np.float64]) -> npt.NDArray[np.float64]:
    """Barycentric interpolation weights 1 / prod_{k != j} (x_j - x_k)."""
    diffs = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diffs, 1.0)
    result: npt.NDArray[np.float64] = 1.0 / np.prod(diffs, axis=1)
    return result


def diff_matrix(rule: QuadRule) -> DiffMatrix:
    """Differentiation matrix of the Lagrange basis on the rule's nodes.

    Off-diagonal entries come from the barycentric formula
    ``(c_j / c_i) / (x_i - x_j)``; each diagonal entry is minus its row sum
    so constants are differentiated to exactly zero.

    Args:
        rule: Quadrature rule whose nodes define the basis

    Returns:
        DiffMatrix with ``d[i, j] = l_j'(x_i)``
    """
    x = rule.nodes
    c = barycentric_weights(x)
    diffs = x[:, None] - x[None, :]
    np.fill_diagonal(diffs, 1.0)
    d = (c[None, :] / c[:, None]) / diffs
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return DiffMatrix(d=d)
