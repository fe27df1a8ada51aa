"""Fast-diagonalization direct solvers.

A plan stores, per direction, the eigen decomposition of the pencil (S, M)
and one diagonal multiplier g(lambda_x_i + lambda_y_j + lambda_z_k) on the
tensor grid of eigenvalue sums. Solving is six contractions and one
entrywise product:

    U = (Tz kron Ty kron Tx) diag(g) (Tz^-1 kron Ty^-1 kron Tx^-1) F

Building a plan is the offline step; ``solve3d``/``solve2d`` are the online
step.
"""

from __future__ import annotations

import enum
import logging
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from tedium.sem.core.base import FrozenRecord, frozen_array
from tedium.sem.core.exceptions import (
    InvalidSpecError,
    PlanningError,
    ShapeError,
    SingularOperatorError,
    ValidationError,
)
from tedium.sem.discretization.sem1d import Operator1D, Spectral1D, eig_pencil
from tedium.sem.tensor.grid import Grid2, Grid3, NodalArray, grid_for, tensor_weights
from tedium.sem.tensor.ops import apply_factors, mode1, mode2, mode3

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
Symbol = Callable[[Array], Array]
Direction = Union[Operator1D, Spectral1D]

NULL_TOLERANCE = 1e-10


class NullspacePolicy(str, enum.Enum):
    """What a plan does with (near) zero denominators."""

    REJECT = "reject"
    PROJECT = "project"


class SolverPlan(FrozenRecord):
    """Precomputed fast-diagonalization data for 2 or 3 directions.

    Attributes:
        spectra: One Spectral1D per direction (x, y[, z])
        alpha: The shift of a Poisson plan, None for general symbols
        multiplier: g(lambda_sum) on the eigenvalue-sum grid
        lambda_sum: Eigenvalue sums, entries below the null tolerance set to 0
        policy: Null-space policy the plan was built with
        projected: Number of multiplier entries zeroed by projection
    """

    _fields = ("spectra", "alpha", "multiplier", "lambda_sum", "policy", "projected")

    spectra: Tuple[Spectral1D, ...]
    alpha: Optional[float]
    multiplier: Array
    lambda_sum: Array
    policy: NullspacePolicy
    projected: int

    def __init__(
        self,
        *,
        spectra: Sequence[Spectral1D],
        alpha: Optional[float],
        multiplier: npt.ArrayLike,
        lambda_sum: npt.ArrayLike,
        policy: NullspacePolicy,
        projected: int,
    ) -> None:
        super().__init__(
            spectra=tuple(spectra),
            alpha=None if alpha is None else float(alpha),
            multiplier=frozen_array(multiplier, order="F"),
            lambda_sum=frozen_array(lambda_sum, order="F"),
            policy=NullspacePolicy(policy),
            projected=int(projected),
        )

    def validate(self) -> None:
        if len(self.spectra) not in (2, 3):
            raise ValidationError("plans cover 2 or 3 directions", value=len(self.spectra))
        if self.multiplier.shape != self.dims or self.lambda_sum.shape != self.dims:
            raise ShapeError("plan", self.dims, tuple(self.multiplier.shape))
        if not np.all(np.isfinite(self.multiplier)):
            raise PlanningError(int(np.count_nonzero(~np.isfinite(self.multiplier))))

    @property
    def dim(self) -> int:
        return len(self.spectra)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(s.size for s in self.spectra)

    @property
    def weights(self) -> Array:
        """Tensor-product GLL weights of the plan's node set."""
        return tensor_weights([s.mass for s in self.spectra])

    def with_multiplier(self, multiplier: npt.ArrayLike) -> SolverPlan:
        """Same eigenbasis, different diagonal."""
        return self.replace(alpha=None, multiplier=multiplier, projected=0)


def spectra_of(ops: Sequence[Direction]) -> Tuple[Spectral1D, ...]:
    """Eigen decompositions for each direction, reusing ones already given."""
    if len(ops) not in (2, 3):
        raise ValidationError("expected 2 or 3 directions", value=len(ops))
    return tuple(op if isinstance(op, Spectral1D) else eig_pencil(op) for op in ops)


def eigenvalue_sum(spectra: Sequence[Spectral1D]) -> Tuple[Array, float]:
    """Grid of lambda_x_i + lambda_y_j (+ lambda_z_k) and the null tolerance.

    Entries whose magnitude is below ``1e-10 * (1 + max sum)`` are set to
    exactly zero.
    """
    total = np.asarray(spectra[0].lambdas)
    for s in spectra[1:]:
        total = np.add.outer(total, s.lambdas)
    total = np.asfortranarray(total)
    eps_null = NULL_TOLERANCE * (1.0 + float(np.max(total)))
    total[np.abs(total) < eps_null] = 0.0
    return total, eps_null


def plan_poisson(
    ops: Sequence[Direction],
    alpha: float,
    policy: NullspacePolicy = NullspacePolicy.PROJECT,
) -> SolverPlan:
    """Plan the inverse of alpha - Delta_h, symbol g(s) = 1 / (alpha + s).

    Args:
        ops: Operator1D or Spectral1D per direction (2 or 3 entries)
        alpha: Non-negative shift
        policy: Zero-denominator handling; PROJECT gives the mean-zero solution

    Returns:
        The solver plan

    Raises:
        InvalidSpecError: If alpha is negative
        SingularOperatorError: If zero modes exist under REJECT
    """
    if not np.isfinite(alpha) or alpha < 0.0:
        raise InvalidSpecError("alpha", alpha, "shift must be finite and >= 0")
    policy = NullspacePolicy(policy)
    spectra = spectra_of(ops)
    lambda_sum, eps_null = eigenvalue_sum(spectra)
    denominator = alpha + lambda_sum
    singular = np.abs(denominator) < eps_null
    zero_modes = int(np.count_nonzero(singular))
    if zero_modes and policy is NullspacePolicy.REJECT:
        raise SingularOperatorError(zero_modes, alpha)
    multiplier = np.zeros_like(denominator)
    np.divide(1.0, denominator, out=multiplier, where=~singular)
    logger.debug("plan_poisson: dims=%s alpha=%g projected=%d", lambda_sum.shape, alpha, zero_modes)
    return SolverPlan(
        spectra=spectra,
        alpha=alpha,
        multiplier=multiplier,
        lambda_sum=lambda_sum,
        policy=policy,
        projected=zero_modes,
    )


def plan_diagonal(ops: Sequence[Direction], symbol: Symbol) -> SolverPlan:
    """Plan T diag(g(lambda_sum)) T^-1 for an arbitrary scalar symbol g.

    Args:
        ops: Operator1D or Spectral1D per direction
        symbol: Vectorized callable applied to the eigenvalue-sum grid

    Returns:
        The solver plan

    Raises:
        PlanningError: If g is not finite somewhere
    """
    spectra = spectra_of(ops)
    lambda_sum, _ = eigenvalue_sum(spectra)
    with np.errstate(all="ignore"):
        multiplier = np.broadcast_to(np.asarray(symbol(lambda_sum), dtype=np.float64), lambda_sum.shape)
    bad = int(np.count_nonzero(~np.isfinite(multiplier)))
    if bad:
        raise PlanningError(bad)
    return SolverPlan(
        spectra=spectra,
        alpha=None,
        multiplier=multiplier,
        lambda_sum=lambda_sum,
        policy=NullspacePolicy.PROJECT,
        projected=0,
    )


def to_eigenbasis(spectra: Sequence[Spectral1D], u: Array) -> Array:
    """Coefficients (Tz^-1 kron Ty^-1 kron Tx^-1) vec(U)."""
    return apply_factors(tuple(s.t_inv for s in spectra), u)


def from_eigenbasis(spectra: Sequence[Spectral1D], coefficients: Array) -> Array:
    """Nodal values (Tz kron Ty kron Tx) vec(coefficients)."""
    return apply_factors(tuple(s.t for s in spectra), coefficients)


def solve_array(plan: SolverPlan, f: Array) -> Array:
    """Array-level solve for either dimension."""
    if tuple(f.shape) != plan.dims:
        raise ShapeError("solve", plan.dims, tuple(f.shape))
    coefficients = to_eigenbasis(plan.spectra, f)
    coefficients *= plan.multiplier
    return from_eigenbasis(plan.spectra, coefficients)


def solve3d(plan: SolverPlan, f: Grid3) -> Grid3:
    """Apply the plan to a 3D right-hand side.

    Raises:
        ShapeError: If the plan is 2D or the dims differ
    """
    if plan.dim != 3:
        raise ShapeError("solve3d", plan.dims, f.dims)
    return Grid3(solve_array(plan, f.values))


def solve2d(plan: SolverPlan, f: Grid2) -> Grid2:
    """Apply the plan to a 2D right-hand side.

    U = Tx [(Tx^-1 F Ty^-T) .* multiplier] Ty^T.

    Raises:
        ShapeError: If the plan is 3D or the dims differ
    """
    if plan.dim != 2:
        raise ShapeError("solve2d", plan.dims, f.dims)
    return Grid2(solve_array(plan, f.values))


def solve(plan: SolverPlan, f: NodalArray) -> NodalArray:
    """Dispatch to solve2d or solve3d by the plan dimension."""
    if isinstance(f, Grid3):
        return solve3d(plan, f)
    if isinstance(f, Grid2):
        return solve2d(plan, f)
    return grid_for(solve_array(plan, f.values))


def operator_factors(source: Union[SolverPlan, Sequence[Direction]]) -> Tuple[Array, ...]:
    """Dense H = M^-1 S per direction."""
    if isinstance(source, SolverPlan):
        return tuple(s.h for s in source.spectra)
    return tuple(op.h if isinstance(op, Spectral1D) else op.mass_inv_stiffness for op in source)


def apply_array(
    factors: Tuple[Array, ...],
    u: Array,
    alpha: float,
    potential: Optional[Array] = None,
) -> Array:
    """alpha U + sum_d H_d applied along d + V .* U, on raw arrays."""
    if tuple(u.shape) != tuple(f.shape[0] for f in factors):
        raise ShapeError("apply_operator", tuple(f.shape[0] for f in factors), tuple(u.shape))
    if u.ndim == 2:
        result: Array = np.asfortranarray(factors[0] @ u + u @ factors[1].T)
    else:
        result = mode1(factors[0], u)
        result += mode2(factors[1], u)
        result += mode3(factors[2], u)
    if alpha:
        result += alpha * u
    if potential is not None:
        if potential.shape != u.shape:
            raise ShapeError("apply_operator", tuple(u.shape), tuple(potential.shape))
        result += potential * u
    return result


def apply_operator(
    source: Union[SolverPlan, Sequence[Direction]],
    u: NodalArray,
    alpha: float,
    potential: Optional[NodalArray] = None,
) -> NodalArray:
    """Forward operator alpha U + (H-sum) U + V .* U.

    Args:
        source: A plan or per-direction operators
        u: Nodal values
        alpha: Shift
        potential: Optional nodal potential V

    Returns:
        Grid of the same type as ``u``

    Raises:
        ShapeError: If dims disagree
    """
    factors = operator_factors(source)
    result = apply_array(factors, u.values, alpha, None if potential is None else potential.values)
    return type(u)(result)
