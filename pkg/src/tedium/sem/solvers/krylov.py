"""Preconditioned conjugate gradient for alpha u - Delta u + V u = f.

The operator is applied matrix-free with mode contractions; the
preconditioner is the fast-diagonalization inverse of
``(alpha + shift_fraction * beta) - Delta_h``. Inner products are weighted by
the tensor GLL mass, in which both the operator and the preconditioner are
self-adjoint.

:func:`pcg_solve_fft` runs the same iteration on the uniform second-order
periodic grid with the DFT solver as preconditioner, for comparisons.
"""

from __future__ import annotations

import enum
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from tedium.sem.core.base import FrozenRecord, frozen_array
from tedium.sem.core.exceptions import InvalidSpecError, PreconditionError, ShapeError
from tedium.sem.discretization.sem1d import BoundaryCondition, Operator1D, Spectral1D
from tedium.sem.solvers.direct import (
    Direction,
    NullspacePolicy,
    SolverPlan,
    apply_array,
    operator_factors,
    plan_poisson,
    solve_array,
    spectra_of,
)
from tedium.sem.solvers.fft import FftPlan, fft_plan, fft_solve_array, q1_stencil_array
from tedium.sem.tensor.grid import NodalArray, grid_for, mesh_coordinates

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
IterationCallback = Callable[[int, float], None]


class PcgConfig(FrozenRecord):
    """PCG parameters.

    Attributes:
        rel_tol: Target for ||F - A U||_2 / ||F||_2
        max_iters: Iteration cap
        alpha: Shift of the operator
        beta_bound: Upper bound of the potential, 0 <= V <= beta_bound
        shift_fraction: Preconditioner shift is alpha + shift_fraction * beta_bound
    """

    _fields = ("rel_tol", "max_iters", "alpha", "beta_bound", "shift_fraction")

    rel_tol: float
    max_iters: int
    alpha: float
    beta_bound: float
    shift_fraction: float

    def __init__(
        self,
        *,
        rel_tol: float = 1e-12,
        max_iters: int = 2000,
        alpha: float = 1.0,
        beta_bound: float = 0.0,
        shift_fraction: float = 0.5,
    ) -> None:
        super().__init__(
            rel_tol=float(rel_tol),
            max_iters=max_iters,
            alpha=float(alpha),
            beta_bound=float(beta_bound),
            shift_fraction=float(shift_fraction),
        )

    def validate(self) -> None:
        if not self.rel_tol > 0.0:
            raise InvalidSpecError("rel_tol", self.rel_tol, "must be > 0")
        if isinstance(self.max_iters, bool) or not isinstance(self.max_iters, int) or self.max_iters < 1:
            raise InvalidSpecError("max_iters", self.max_iters, "must be an integer >= 1")
        if not self.alpha >= 0.0:
            raise InvalidSpecError("alpha", self.alpha, "must be >= 0")
        if not self.beta_bound >= 0.0:
            raise InvalidSpecError("beta_bound", self.beta_bound, "must be >= 0")
        if not 0.0 <= self.shift_fraction <= 1.0:
            raise InvalidSpecError("shift_fraction", self.shift_fraction, "must lie in [0, 1]")

    @property
    def preconditioner_shift(self) -> float:
        return self.alpha + self.shift_fraction * self.beta_bound


class PcgReport(FrozenRecord):
    """Outcome of one PCG run.

    Attributes:
        iterations: Iterations performed
        residual_history: Relative residual after each iteration
        converged: Whether the last history entry reached rel_tol
        final_residual: Recomputed ||F - A U||_2 / ||F||_2 of the returned U
    """

    _fields = ("iterations", "residual_history", "converged", "final_residual")

    iterations: int
    residual_history: Array
    converged: bool
    final_residual: float

    def __init__(
        self,
        *,
        iterations: int,
        residual_history: npt.ArrayLike,
        converged: bool,
        final_residual: float,
    ) -> None:
        super().__init__(
            iterations=int(iterations),
            residual_history=frozen_array(residual_history),
            converged=bool(converged),
            final_residual=float(final_residual),
        )

    def validate(self) -> None:
        if self.residual_history.shape != (self.iterations,):
            raise ShapeError("PcgReport", (self.iterations,), tuple(self.residual_history.shape))


def _check_potential(potential: Array, beta_bound: float) -> None:
    low, high = float(np.min(potential)), float(np.max(potential))
    if low < 0.0 or high > beta_bound * (1.0 + 1e-12):
        raise PreconditionError(
            f"potential must lie in [0, {beta_bound}], got [{low:.6g}, {high:.6g}]",
            value=(low, high),
            beta_bound=beta_bound,
        )


def _check_directions(spectra: Sequence[Spectral1D]) -> None:
    for axis, spectrum in enumerate(spectra):
        if spectrum.bc is BoundaryCondition.DIRICHLET:
            raise InvalidSpecError(
                "bc",
                spectrum.bc.value,
                f"direction {axis}: PCG supports periodic and Neumann meshes only",
            )


def _pcg_iterate(
    matvec: Callable[[Array], Array],
    precondition: Callable[[Array], Array],
    inner: Callable[[Array, Array], float],
    f: Array,
    cfg: PcgConfig,
    callback: Optional[IterationCallback],
) -> Tuple[Array, PcgReport]:
    """PCG from U0 = 0; stops on the Euclidean norm of the recurrence residual."""
    u = np.zeros_like(f)
    rhs_norm = float(np.linalg.norm(f))
    if rhs_norm == 0.0:
        return u, PcgReport(iterations=0, residual_history=[], converged=True, final_residual=0.0)

    r = f.copy()
    z = precondition(r)
    p = z.copy()
    rz = inner(r, z)
    history: List[float] = []
    converged = False
    for iteration in range(1, cfg.max_iters + 1):
        ap = matvec(p)
        step = rz / inner(p, ap)
        u += step * p
        r -= step * ap
        rel = float(np.linalg.norm(r)) / rhs_norm
        history.append(rel)
        if callback is not None:
            callback(iteration, rel)
        logger.debug("pcg: iteration %d rel_residual=%.3e", iteration, rel)
        if rel <= cfg.rel_tol:
            converged = True
            break
        z = precondition(r)
        rz_next = inner(r, z)
        p = z + (rz_next / rz) * p
        rz = rz_next

    final = float(np.linalg.norm(f - matvec(u))) / rhs_norm
    if not converged:
        logger.warning("pcg: no convergence after %d iterations (rel_residual=%.3e)", len(history), history[-1])
    report = PcgReport(
        iterations=len(history),
        residual_history=history,
        converged=converged,
        final_residual=final,
    )
    return u, report


def pcg_solve(
    ops: Sequence[Direction],
    potential: NodalArray,
    rhs: NodalArray,
    cfg: PcgConfig,
    preconditioner: Optional[SolverPlan] = None,
    callback: Optional[IterationCallback] = None,
) -> Tuple[NodalArray, PcgReport]:
    """Solve alpha U + (H-sum) U + V .* U = F by PCG from U0 = 0.

    Args:
        ops: Operator1D or Spectral1D per direction, periodic or Neumann
        potential: Nodal potential V with 0 <= V <= cfg.beta_bound
        rhs: Right-hand side F
        cfg: Tolerances and shifts
        preconditioner: A plan_poisson plan at cfg.preconditioner_shift,
            built here when omitted
        callback: Called as ``callback(iteration, rel_residual)``

    Returns:
        Tuple of the iterate and the report; a run that hits max_iters
        returns its partial result with ``converged=False``

    Raises:
        InvalidSpecError: If a direction has Dirichlet boundary conditions
        ShapeError: If V, F and the operators disagree in dims
        PreconditionError: If V leaves [0, beta_bound]
    """
    spectra = spectra_of(ops)
    _check_directions(spectra)
    dims = tuple(s.size for s in spectra)
    for name, grid in (("potential", potential), ("rhs", rhs)):
        if grid.dims != dims:
            raise ShapeError(f"pcg_solve {name}", dims, grid.dims)
    v = potential.values
    _check_potential(v, cfg.beta_bound)
    plan = (
        preconditioner
        if preconditioner is not None
        else plan_poisson(spectra, cfg.preconditioner_shift, NullspacePolicy.PROJECT)
    )
    factors = operator_factors(plan)
    weights = plan.weights

    def matvec(u: Array) -> Array:
        return apply_array(factors, u, cfg.alpha, v)

    def inner(a: Array, b: Array) -> float:
        return float(np.sum(weights * a * b))

    u, report = _pcg_iterate(
        matvec,
        lambda r: solve_array(plan, r),
        inner,
        np.array(rhs.values, order="F"),
        cfg,
        callback,
    )
    return grid_for(u), report


def pcg_solve_fft(
    spacings: Sequence[float],
    potential: NodalArray,
    rhs: NodalArray,
    cfg: PcgConfig,
    preconditioner: Optional[FftPlan] = None,
    callback: Optional[IterationCallback] = None,
) -> Tuple[NodalArray, PcgReport]:
    """PCG on the periodic second-order grid, preconditioned by the DFT solver.

    The operator is the 5- or 7-point stencil alpha U - Delta_h U plus V .* U
    on a uniform periodic grid; the preconditioner inverts the stencil at
    shift cfg.preconditioner_shift. Both are symmetric in the plain dot
    product, which is used for every inner product.

    Args:
        spacings: Grid spacing per direction
        potential: Nodal potential V with 0 <= V <= cfg.beta_bound
        rhs: Right-hand side F
        cfg: Tolerances and shifts
        preconditioner: An fft_plan at cfg.preconditioner_shift, built here
            when omitted
        callback: Called as ``callback(iteration, rel_residual)``

    Raises:
        ShapeError: If V, F and the plan disagree in dims
        PreconditionError: If V leaves [0, beta_bound]
    """
    dims = rhs.dims
    if potential.dims != dims:
        raise ShapeError("pcg_solve_fft potential", dims, potential.dims)
    plan = preconditioner if preconditioner is not None else fft_plan(dims, spacings, cfg.preconditioner_shift)
    if plan.dims != dims:
        raise ShapeError("pcg_solve_fft preconditioner", dims, plan.dims)
    v = potential.values
    _check_potential(v, cfg.beta_bound)
    steps = plan.spacings

    def matvec(u: Array) -> Array:
        return q1_stencil_array(u, steps, cfg.alpha) + v * u

    def inner(a: Array, b: Array) -> float:
        return float(np.vdot(a, b))

    u, report = _pcg_iterate(
        matvec,
        lambda r: fft_solve_array(plan, r),
        inner,
        np.array(rhs.values),
        cfg,
        callback,
    )
    return grid_for(u), report


class ForcingKind(str, enum.Enum):
    """How the Schroedinger right-hand side is built from the exact solution."""

    EXACT = "exact"
    DISCRETE = "discrete"


def schrodinger_potential(beta: float, nodes: Sequence[npt.ArrayLike]) -> NodalArray:
    """V = beta prod_d sin^2(pi x_d / 4) on a tensor node set.

    Args:
        beta: Potential height, beta > 0
        nodes: Node coordinates per direction

    Returns:
        Grid of V values
    """
    if not beta > 0.0:
        raise InvalidSpecError("beta", beta, "must be > 0")
    values = np.full(tuple(len(np.asarray(x)) for x in nodes), float(beta))
    for coords in mesh_coordinates(nodes):
        values *= np.sin(np.pi * coords / 4.0) ** 2
    return grid_for(values)


def schrodinger_exact(nodes: Sequence[npt.ArrayLike]) -> NodalArray:
    """u = prod_d cos(pi x_d / 16), the smooth solution on [-16, 16]^d."""
    values = np.ones(tuple(len(np.asarray(x)) for x in nodes))
    for coords in mesh_coordinates(nodes):
        values *= np.cos(np.pi * coords / 16.0)
    return grid_for(values)


def schrodinger_forcing(
    ops: Sequence[Operator1D],
    alpha: float,
    potential: NodalArray,
    kind: ForcingKind = ForcingKind.EXACT,
) -> NodalArray:
    """Right-hand side whose solution is :func:`schrodinger_exact`.

    EXACT uses the analytic f = (alpha + d pi^2/256 + V) u; DISCRETE applies
    the discrete operator to the nodal u, so the discrete solution equals the
    nodal u up to solver tolerance.
    """
    kind = ForcingKind(kind)
    nodes = [op.nodes for op in ops]
    exact = schrodinger_exact(nodes)
    if kind is ForcingKind.DISCRETE:
        return grid_for(apply_array(operator_factors(ops), exact.values, alpha, potential.values))
    return schrodinger_analytic_forcing(nodes, alpha, potential)


def schrodinger_analytic_forcing(
    nodes: Sequence[npt.ArrayLike],
    alpha: float,
    potential: NodalArray,
) -> NodalArray:
    """f = (alpha + d pi^2/256 + V) u sampled on any tensor node set."""
    exact = schrodinger_exact(nodes)
    if potential.dims != exact.dims:
        raise ShapeError("schrodinger_analytic_forcing", exact.dims, potential.dims)
    scale = alpha + len(nodes) * np.pi ** 2 / 256.0
    return grid_for((scale + potential.values) * exact.values)
