"""Tests for the DFT-diagonalized periodic solver."""

import numpy as np
import pytest

from tedium.sem.core.exceptions import InvalidSpecError, ShapeError, SingularOperatorError
from tedium.sem.discretization.sem1d import BoundaryCondition, MeshSpec1D, assemble_1d, eig_pencil, mesh_operators
from tedium.sem.solvers.direct import NullspacePolicy, plan_poisson, solve
from tedium.sem.solvers.fft import fft_plan, fft_poisson_solve, periodic_nodes, q1_periodic_apply, q1_periodic_eigs
from tedium.sem.tensor.grid import Grid2, Grid3


def q1_mesh(n: int, length: float) -> MeshSpec1D:
    return MeshSpec1D(order=1, cells=n, a=0.0, b=length, bc=BoundaryCondition.PERIODIC)


def test_q1_periodic_eigs() -> None:
    """Test the closed-form eigenvalues."""
    np.testing.assert_allclose(q1_periodic_eigs(4, 1.0), [0.0, 2.0, 4.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(q1_periodic_eigs(2, 0.5), [0.0, 16.0], atol=1e-14)
    with pytest.raises(InvalidSpecError):
        q1_periodic_eigs(1, 1.0)
    with pytest.raises(InvalidSpecError):
        q1_periodic_eigs(4, 0.0)


def test_eigs_match_pencil() -> None:
    """Test the Q1 periodic pencil has the DFT eigenvalues."""
    eig = eig_pencil(assemble_1d(q1_mesh(8, 2.0)))
    np.testing.assert_allclose(np.sort(q1_periodic_eigs(8, 0.25)), eig.lambdas, atol=1e-11)


@pytest.mark.parametrize("n", [4, 8, 16, 32])
def test_fft_matches_fast_diagonalization(n: int, rng: np.random.Generator) -> None:
    """Test both solvers agree on Q1 periodic meshes."""
    ops = mesh_operators([q1_mesh(n, 2.0)] * 3)
    f = Grid3(rng.standard_normal((n, n, n)))
    sem = solve(plan_poisson(ops, 1.0), f)
    fft = fft_poisson_solve(fft_plan((n, n, n), (2.0 / n,) * 3, 1.0), f)
    assert isinstance(fft, Grid3)
    assert (sem - fft).max_abs() <= 1e-10 * fft.max_abs()


def test_fft_solve_inverts_stencil(rng: np.random.Generator) -> None:
    """Test the stencil applied to the solution returns F."""
    dims, spacings = (6, 10), (0.5, 0.25)
    f = Grid2(rng.standard_normal(dims))
    u = fft_poisson_solve(fft_plan(dims, spacings, 2.0), f)
    assert (q1_periodic_apply(u, spacings, 2.0) - f).max_abs() <= 1e-12 * f.max_abs()


def test_fft_constant_rhs() -> None:
    """Test F = c with alpha = 1 gives U = c."""
    u = fft_poisson_solve(fft_plan((4, 4, 4), (1.0, 1.0, 1.0), 1.0), Grid3.full((4, 4, 4), 3.0))
    assert (u - 3.0).max_abs() <= 1e-13


def test_fft_projection(rng: np.random.Generator) -> None:
    """Test alpha = 0 zeroes the mean mode."""
    dims, spacings = (8, 8), (1.0, 1.0)
    raw = rng.standard_normal(dims)
    f = Grid2(raw - raw.mean())
    plan = fft_plan(dims, spacings, 0.0)
    assert plan.projected == 1
    u = fft_poisson_solve(plan, f)
    assert abs(u.values.mean()) <= 1e-12
    assert (q1_periodic_apply(u, spacings, 0.0) - f).max_abs() <= 1e-10 * f.max_abs()
    with pytest.raises(SingularOperatorError):
        fft_plan(dims, spacings, 0.0, NullspacePolicy.REJECT)


def test_fft_errors() -> None:
    """Test invalid plans and mismatched inputs."""
    with pytest.raises(InvalidSpecError):
        fft_plan((4, 4), (1.0,), 1.0)
    with pytest.raises(InvalidSpecError):
        fft_plan((4, 4), (1.0, 1.0), -1.0)
    plan = fft_plan((4, 4), (1.0, 1.0), 1.0)
    with pytest.raises(ShapeError):
        fft_poisson_solve(plan, Grid2.zeros((4, 5)))
    with pytest.raises(InvalidSpecError):
        q1_periodic_apply(Grid2.zeros((4, 4)), (1.0,), 1.0)


def test_fft_round_trip_3d(rng: np.random.Generator) -> None:
    """Test stencil then solve returns U on an anisotropic 3D grid."""
    dims, spacings = (8, 6, 10), (0.25, 0.5, 0.2)
    u = Grid3(rng.standard_normal(dims))
    plan = fft_plan(dims, spacings, 1.0)
    back = fft_poisson_solve(plan, q1_periodic_apply(u, spacings, 1.0))
    assert (back - u).max_abs() <= 1e-12 * u.max_abs()


def test_periodic_nodes() -> None:
    """Test the grid excludes the right end point."""
    np.testing.assert_allclose(periodic_nodes(4, -2.0, 2.0), [-2.0, -1.0, 0.0, 1.0])
    with pytest.raises(InvalidSpecError):
        periodic_nodes(1, 0.0, 1.0)
    with pytest.raises(InvalidSpecError):
        periodic_nodes(4, 1.0, 1.0)
