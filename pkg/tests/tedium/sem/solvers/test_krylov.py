"""Tests for the preconditioned conjugate gradient solver."""

from typing import List, Tuple

import numpy as np
import pytest

from tedium.sem.core.exceptions import InvalidSpecError, PreconditionError, ShapeError
from tedium.sem.discretization.sem1d import BoundaryCondition, MeshSpec1D, Operator1D, eig_pencil, mesh_operators
from tedium.sem.solvers.direct import plan_poisson
from tedium.sem.solvers.fft import fft_plan, periodic_nodes, q1_periodic_apply
from tedium.sem.solvers.krylov import (
    ForcingKind,
    PcgConfig,
    PcgReport,
    pcg_solve,
    pcg_solve_fft,
    schrodinger_analytic_forcing,
    schrodinger_exact,
    schrodinger_forcing,
    schrodinger_potential,
)
from tedium.sem.tensor.grid import Grid2, Grid3, NodalArray, tensor_weights, weighted_l2


def periodic_ops(order: int, cells: int, dim: int = 3) -> List[Operator1D]:
    spec = MeshSpec1D(order=order, cells=cells, a=-16.0, b=16.0, bc=BoundaryCondition.PERIODIC)
    return mesh_operators([spec] * dim)


def relative_error(ops: List[Operator1D], u: NodalArray) -> float:
    weights = tensor_weights([op.mass for op in ops])
    exact = schrodinger_exact([op.nodes for op in ops])
    return weighted_l2(u - exact, weights) / weighted_l2(exact, weights)


def iterations(order: int, cells: int, beta: float) -> int:
    ops = periodic_ops(order, cells)
    potential = schrodinger_potential(beta, [op.nodes for op in ops])
    rhs = schrodinger_forcing(ops, 1.0, potential, ForcingKind.DISCRETE)
    _, report = pcg_solve(ops, potential, rhs, PcgConfig(beta_bound=beta))
    assert report.converged
    return report.iterations


def test_pcg_config_defaults() -> None:
    """Test defaults and the preconditioner shift."""
    cfg = PcgConfig()
    assert (cfg.rel_tol, cfg.max_iters, cfg.alpha) == (1e-12, 2000, 1.0)
    assert PcgConfig(alpha=1.0, beta_bound=4.0).preconditioner_shift == 3.0
    assert PcgConfig(alpha=1.0, beta_bound=4.0, shift_fraction=1.0).preconditioner_shift == 5.0


@pytest.mark.parametrize(
    "kwargs",
    [{"rel_tol": 0.0}, {"max_iters": 0}, {"alpha": -1.0}, {"beta_bound": -0.5}, {"shift_fraction": 1.5}],
)
def test_pcg_config_invalid(kwargs: dict) -> None:
    """Test invalid parameters are rejected."""
    with pytest.raises(InvalidSpecError):
        PcgConfig(**kwargs)


def test_pcg_report_history_length() -> None:
    """Test the history must have one entry per iteration."""
    with pytest.raises(ShapeError):
        PcgReport(iterations=2, residual_history=[0.1], converged=False, final_residual=0.1)


def test_schrodinger_potential() -> None:
    """Test V = beta prod sin^2(pi x / 4)."""
    v = schrodinger_potential(3.0, [[0.0, 2.0], [0.0, 2.0], [2.0, -2.0]])
    assert v.values[1, 1, 0] == pytest.approx(3.0)
    assert v.values[1, 1, 1] == pytest.approx(3.0)
    assert v.values[0, 1, 0] == 0.0
    with pytest.raises(InvalidSpecError):
        schrodinger_potential(0.0, [[0.0], [0.0]])


def test_schrodinger_exact_periodic() -> None:
    """Test the exact solution matches across the periodic boundary."""
    u = schrodinger_exact([[-16.0, 0.0, 16.0], [0.0]])
    assert u.values[0, 0] == pytest.approx(u.values[2, 0])
    assert u.values[1, 0] == 1.0


def test_pcg_zero_potential_one_iteration() -> None:
    """Test the exact preconditioner converges in one step."""
    ops = periodic_ops(5, 4)
    zero = Grid3.zeros(tuple(op.size for op in ops))
    rhs = schrodinger_forcing(ops, 1.0, zero, ForcingKind.DISCRETE)
    u, report = pcg_solve(ops, zero, rhs, PcgConfig())
    assert report.converged
    assert report.iterations == 1
    assert relative_error(ops, u) <= 1e-10


def test_pcg_zero_rhs() -> None:
    """Test F = 0 returns zero without iterating."""
    ops = periodic_ops(2, 4, dim=2)
    dims = tuple(op.size for op in ops)
    u, report = pcg_solve(ops, Grid2.zeros(dims), Grid2.zeros(dims), PcgConfig())
    assert isinstance(u, Grid2)
    assert u.max_abs() == 0.0
    assert (report.iterations, report.converged, report.final_residual) == (0, True, 0.0)


def test_pcg_beta_one() -> None:
    """Test a small potential converges in about ten iterations."""
    ops = periodic_ops(5, 10)
    nodes = [op.nodes for op in ops]
    potential = schrodinger_potential(1.0, nodes)
    rhs = schrodinger_forcing(ops, 1.0, potential, ForcingKind.DISCRETE)
    calls: List[Tuple[int, float]] = []
    cfg = PcgConfig(alpha=1.0, beta_bound=1.0)
    u, report = pcg_solve(ops, potential, rhs, cfg, callback=lambda i, rel: calls.append((i, rel)))
    assert report.converged
    assert 8 <= report.iterations <= 12
    assert report.residual_history[-1] <= 1e-12
    assert report.final_residual <= 1e-10
    assert [i for i, _ in calls] == list(range(1, report.iterations + 1))
    assert relative_error(ops, u) <= 1e-9


def test_pcg_given_preconditioner() -> None:
    """Test an explicit preconditioner plan is used as given."""
    ops = periodic_ops(3, 4, dim=2)
    nodes = [op.nodes for op in ops]
    potential = schrodinger_potential(2.0, nodes)
    rhs = schrodinger_forcing(ops, 1.0, potential, ForcingKind.DISCRETE)
    cfg = PcgConfig(beta_bound=2.0, shift_fraction=1.0)
    plan = plan_poisson(ops, cfg.preconditioner_shift)
    _, with_plan = pcg_solve(ops, potential, rhs, cfg, preconditioner=plan)
    _, built = pcg_solve(ops, potential, rhs, cfg)
    assert with_plan.iterations == built.iterations
    np.testing.assert_allclose(with_plan.residual_history, built.residual_history)


def test_pcg_not_converged() -> None:
    """Test hitting max_iters returns the partial result."""
    ops = periodic_ops(3, 4)
    nodes = [op.nodes for op in ops]
    potential = schrodinger_potential(100.0, nodes)
    rhs = schrodinger_forcing(ops, 1.0, potential, ForcingKind.DISCRETE)
    u, report = pcg_solve(ops, potential, rhs, PcgConfig(beta_bound=100.0, max_iters=2))
    assert not report.converged
    assert report.iterations == 2
    assert report.residual_history.shape == (2,)
    assert report.final_residual > 1e-12
    assert u.max_abs() > 0.0


def test_pcg_potential_out_of_range() -> None:
    """Test V above beta_bound is rejected."""
    ops = periodic_ops(1, 4, dim=2)
    dims = tuple(op.size for op in ops)
    with pytest.raises(PreconditionError):
        pcg_solve(ops, Grid2.full(dims, 2.0), Grid2.full(dims, 1.0), PcgConfig(beta_bound=1.0))
    with pytest.raises(PreconditionError):
        pcg_solve(ops, Grid2.full(dims, -0.1), Grid2.full(dims, 1.0), PcgConfig(beta_bound=1.0))


def test_pcg_shape_mismatch() -> None:
    """Test V and F must match the operators."""
    ops = periodic_ops(1, 4, dim=2)
    with pytest.raises(ShapeError):
        pcg_solve(ops, Grid2.zeros((4, 4)), Grid2.zeros((4, 5)), PcgConfig())


@pytest.mark.slow
@pytest.mark.parametrize("beta,low,high", [(10.0, 25, 36), (100.0, 61, 98)])
def test_pcg_iteration_counts(beta: float, low: int, high: int) -> None:
    """Test iteration counts on a 100^3 Q5 mesh for moderate and large potentials."""
    assert iterations(5, 20, beta) in range(low, high + 1)


def test_pcg_iterations_mesh_independent() -> None:
    """Test the count for beta = 1 barely moves under refinement."""
    coarse = iterations(5, 10, 1.0)
    fine = iterations(5, 12, 1.0)
    assert abs(fine - coarse) <= 0.2 * coarse


def test_pcg_high_order_accuracy() -> None:
    """Test Q20 with the analytic right-hand side reaches the exact solution."""
    ops = periodic_ops(20, 8, dim=2)
    nodes = [op.nodes for op in ops]
    potential = schrodinger_potential(1.0, nodes)
    rhs = schrodinger_forcing(ops, 1.0, potential, ForcingKind.EXACT)
    u, report = pcg_solve(ops, potential, rhs, PcgConfig(beta_bound=1.0))
    assert report.converged
    assert relative_error(ops, u) <= 1e-10


@pytest.mark.parametrize("bcs", [("dirichlet", "periodic"), ("neumann", "dirichlet")])
def test_pcg_rejects_dirichlet(bcs: Tuple[str, str]) -> None:
    """Test a Dirichlet direction is refused for operators and decompositions alike."""
    ops = mesh_operators([MeshSpec1D(order=2, cells=3, a=-1.0, b=1.0, bc=BoundaryCondition(bc)) for bc in bcs])
    dims = tuple(op.size for op in ops)
    with pytest.raises(InvalidSpecError) as excinfo:
        pcg_solve(ops, Grid2.zeros(dims), Grid2.full(dims, 1.0), PcgConfig())
    assert excinfo.value.context["field"] == "bc"
    with pytest.raises(InvalidSpecError):
        pcg_solve([eig_pencil(op) for op in ops], Grid2.zeros(dims), Grid2.full(dims, 1.0), PcgConfig())


def test_pcg_neumann_accepted() -> None:
    """Test Neumann directions run and converge."""
    ops = mesh_operators([MeshSpec1D(order=3, cells=3, a=-1.0, b=1.0, bc=BoundaryCondition.NEUMANN)] * 2)
    dims = tuple(op.size for op in ops)
    _, report = pcg_solve(ops, Grid2.full(dims, 0.5), Grid2.full(dims, 1.0), PcgConfig(beta_bound=1.0))
    assert report.converged


def grid_problem(n: int, beta: float, dim: int = 2) -> Tuple[List[np.ndarray], Tuple[float, ...], NodalArray, NodalArray]:
    nodes = [periodic_nodes(n, -16.0, 16.0) for _ in range(dim)]
    potential = schrodinger_potential(beta, nodes)
    return nodes, (32.0 / n,) * dim, potential, schrodinger_analytic_forcing(nodes, 1.0, potential)


def test_pcg_fft_exact_preconditioner() -> None:
    """Test a zero potential converges in one step with the DFT preconditioner."""
    nodes, spacings, _, _ = grid_problem(16, 1.0)
    zero = Grid2.zeros((16, 16))
    rhs = schrodinger_analytic_forcing(nodes, 1.0, zero)
    u, report = pcg_solve_fft(spacings, zero, rhs, PcgConfig())
    assert report.converged
    assert report.iterations == 1
    assert (q1_periodic_apply(u, spacings, 1.0) - rhs).max_abs() <= 1e-10 * rhs.max_abs()


def test_pcg_fft_second_order() -> None:
    """Test the grid solution converges at second order with a bounded iteration count."""
    errors = []
    counts = []
    for n in (64, 128):
        nodes, spacings, potential, rhs = grid_problem(n, 1.0)
        calls: List[int] = []
        u, report = pcg_solve_fft(spacings, potential, rhs, PcgConfig(beta_bound=1.0), callback=lambda i, _: calls.append(i))
        assert report.converged
        assert calls == list(range(1, report.iterations + 1))
        counts.append(report.iterations)
        errors.append(float(np.sqrt(np.prod(spacings) * np.sum((u - schrodinger_exact(nodes)).values ** 2))))
    assert 1.85 <= np.log2(errors[0] / errors[1]) <= 2.15
    assert max(counts) <= 16


def test_pcg_fft_errors() -> None:
    """Test mismatched inputs and out-of-range potentials."""
    _, spacings, potential, rhs = grid_problem(10, 1.0)
    with pytest.raises(ShapeError):
        pcg_solve_fft(spacings, Grid2.zeros((10, 4)), rhs, PcgConfig(beta_bound=1.0))
    with pytest.raises(ShapeError):
        pcg_solve_fft(spacings, potential, rhs, PcgConfig(beta_bound=1.0), preconditioner=fft_plan((4, 4), spacings, 1.5))
    with pytest.raises(PreconditionError):
        pcg_solve_fft(spacings, potential, rhs, PcgConfig(beta_bound=0.5))
