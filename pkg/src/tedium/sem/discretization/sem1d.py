"""One-dimensional spectral-element operators.

Assembles the stiffness matrix S and the diagonal (GLL-lumped) mass matrix M
of continuous Q^k elements on a uniform mesh, and computes the eigen
decomposition of the pencil (S, M) through the symmetric matrix
M^{-1/2} S M^{-1/2}.
"""

from __future__ import annotations

import enum
import logging
from typing import List, Optional, Sequence

import numpy as np
import numpy.typing as npt
import scipy.linalg
from scipy.sparse import coo_matrix

from tedium.sem.core.base import FrozenRecord, frozen_array
from tedium.sem.core.exceptions import (
    EigensolverError,
    InvalidOperatorError,
    InvalidSpecError,
)
from tedium.sem.discretization.quadrature import diff_matrix, gll_rule

logger = logging.getLogger(__name__)


class BoundaryCondition(str, enum.Enum):
    """Homogeneous boundary condition applied in one direction."""

    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, value: str) -> BoundaryCondition:
        """Look up a condition by (case-insensitive) name."""
        try:
            return cls(value.strip().lower())
        except ValueError as e:
            raise InvalidSpecError("bc", value, f"expected one of {[c.value for c in cls]}") from e


class MeshSpec1D(FrozenRecord):
    """Uniform mesh of ``cells`` Q^order elements on [a, b]."""

    _fields = ("order", "cells", "a", "b", "bc")

    order: int
    cells: int
    a: float
    b: float
    bc: BoundaryCondition

    def __init__(self, *, order: int, cells: int, a: float, b: float, bc: BoundaryCondition) -> None:
        super().__init__(order=order, cells=cells, a=float(a), b=float(b), bc=BoundaryCondition(bc))

    def validate(self) -> None:
        for name in ("order", "cells"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise InvalidSpecError(name, value, "must be an integer >= 1")
        if not (np.isfinite(self.a) and np.isfinite(self.b)) or self.a >= self.b:
            raise InvalidSpecError("interval", (self.a, self.b), "need finite a < b")
        if self.bc is BoundaryCondition.DIRICHLET and self.order * self.cells < 2:
            raise InvalidSpecError("cells", self.cells, "Dirichlet mesh has no interior node")

    @property
    def h(self) -> float:
        """Cell width."""
        return (self.b - self.a) / self.cells

    @property
    def dofs(self) -> int:
        """Number of degrees of freedom after applying the boundary condition."""
        total = self.order * self.cells
        if self.bc is BoundaryCondition.NEUMANN:
            return total + 1
        if self.bc is BoundaryCondition.DIRICHLET:
            return total - 1
        return total


class Operator1D(FrozenRecord):
    """Assembled 1D operators for one spatial direction.

    Attributes:
        stiffness: Dense symmetric N x N matrix <phi_i', phi_j'>
        mass: Length-N positive diagonal of the lumped mass matrix
        nodes: Length-N physical node coordinates
        spec: The mesh the operators were assembled on
    """

    _fields = ("stiffness", "mass", "nodes", "spec")

    stiffness: npt.NDArray[np.float64]
    mass: npt.NDArray[np.float64]
    nodes: npt.NDArray[np.float64]
    spec: MeshSpec1D

    def __init__(
        self,
        *,
        stiffness: npt.ArrayLike,
        mass: npt.ArrayLike,
        nodes: npt.ArrayLike,
        spec: MeshSpec1D,
    ) -> None:
        super().__init__(
            stiffness=frozen_array(stiffness),
            mass=frozen_array(mass),
            nodes=frozen_array(nodes),
            spec=spec,
        )

    def validate(self) -> None:
        n = self.mass.size
        if self.mass.ndim != 1 or self.stiffness.shape != (n, n) or self.nodes.shape != (n,):
            raise InvalidOperatorError(
                "stiffness, mass and nodes sizes disagree",
                value=(self.stiffness.shape, self.mass.shape, self.nodes.shape),
            )

    @property
    def size(self) -> int:
        """Number of degrees of freedom N."""
        return int(self.mass.size)

    @property
    def mass_inv_stiffness(self) -> npt.NDArray[np.float64]:
        """Dense H = M^{-1} S."""
        result: npt.NDArray[np.float64] = self.stiffness / self.mass[:, None]
        return result


class Spectral1D(FrozenRecord):
    """Eigen decomposition S T = M T diag(lambdas) of one direction.

    Attributes:
        lambdas: Ascending eigenvalues
        t: Eigenvector matrix T = M^{-1/2} Q
        t_inv: Its inverse Q^T M^{1/2}
        h: Dense M^{-1} S, kept for operator application
        mass: The diagonal mass the pencil was built with
        bc: Boundary condition of the source mesh, None when unknown
    """

    _fields = ("lambdas", "t", "t_inv", "h", "mass", "bc")

    lambdas: npt.NDArray[np.float64]
    t: npt.NDArray[np.float64]
    t_inv: npt.NDArray[np.float64]
    h: npt.NDArray[np.float64]
    mass: npt.NDArray[np.float64]
    bc: Optional[BoundaryCondition]

    def __init__(
        self,
        *,
        lambdas: npt.ArrayLike,
        t: npt.ArrayLike,
        t_inv: npt.ArrayLike,
        h: npt.ArrayLike,
        mass: npt.ArrayLike,
        bc: Optional[BoundaryCondition] = None,
    ) -> None:
        super().__init__(
            lambdas=frozen_array(lambdas),
            t=frozen_array(t),
            t_inv=frozen_array(t_inv),
            h=frozen_array(h),
            mass=frozen_array(mass),
            bc=None if bc is None else BoundaryCondition(bc),
        )

    def validate(self) -> None:
        n = self.lambdas.size
        for name in ("t", "t_inv", "h"):
            if getattr(self, name).shape != (n, n):
                raise InvalidOperatorError(f"{name} must be {n}x{n}", value=getattr(self, name).shape)
        if self.mass.shape != (n,):
            raise InvalidOperatorError("mass length must match eigenvalue count", value=self.mass.shape)

    @property
    def size(self) -> int:
        return int(self.lambdas.size)


def assemble_1d(spec: MeshSpec1D) -> Operator1D:
    """Assemble stiffness and lumped mass on a uniform mesh.

    Local matrices are ``(2/h) D^T W D`` and ``(h/2) W`` on the GLL rule with
    k+1 points; interface nodes are shared (C0 continuity). Dirichlet drops
    the two end nodes, Periodic identifies the last node with the first.

    Args:
        spec: Mesh description

    Returns:
        The assembled operators
    """
    k, n, h = spec.order, spec.cells, spec.h
    rule = gll_rule(k + 1)
    d = diff_matrix(rule).d
    w = rule.weights
    k_loc = (2.0 / h) * (d.T * w) @ d
    m_loc = (h / 2.0) * w

    full = k * n + 1
    local = np.arange(k + 1)
    index = (np.arange(n)[:, None] * k + local[None, :])
    nodes_full = spec.a + h * np.arange(n)[:, None] + (rule.nodes[None, :] + 1.0) * (h / 2.0)
    coords = np.empty(full)
    coords[index.ravel()] = nodes_full.ravel()
    coords[0], coords[-1] = spec.a, spec.b

    size = full
    if spec.bc is BoundaryCondition.PERIODIC:
        index = index % (k * n)
        size = k * n
        coords = coords[:size]

    rows = np.repeat(index, k + 1, axis=1).ravel()
    cols = np.tile(index, (1, k + 1)).ravel()
    values = np.tile(k_loc.ravel(), n)
    stiffness = coo_matrix((values, (rows, cols)), shape=(size, size)).toarray()
    mass = np.bincount(index.ravel(), weights=np.tile(m_loc, n), minlength=size)

    if spec.bc is BoundaryCondition.DIRICHLET:
        stiffness = stiffness[1:-1, 1:-1]
        mass = mass[1:-1]
        coords = coords[1:-1]

    stiffness = 0.5 * (stiffness + stiffness.T)
    logger.debug("assemble_1d: k=%d n=%d bc=%s -> N=%d", k, n, spec.bc.value, mass.size)
    return Operator1D(stiffness=stiffness, mass=mass, nodes=coords, spec=spec)


def eig_pencil(op: Operator1D) -> Spectral1D:
    """Solve S v = lambda M v through the symmetric form M^{-1/2} S M^{-1/2}.

    Eigenvalues are sorted ascending; each column of Q is signed so that its
    largest-magnitude entry is positive.

    Args:
        op: Assembled operators of one direction

    Returns:
        Eigenvalues with T = M^{-1/2} Q and T^{-1} = Q^T M^{1/2}

    Raises:
        InvalidOperatorError: If a mass entry is not positive
        EigensolverError: If LAPACK fails to converge
    """
    mass = op.mass
    if np.any(~np.isfinite(mass)) or np.any(mass <= 0.0):
        raise InvalidOperatorError("mass entries must be positive", value=float(np.min(mass)))
    scale = 1.0 / np.sqrt(mass)
    s1 = scale[:, None] * op.stiffness * scale[None, :]
    s1 = 0.5 * (s1 + s1.T)
    try:
        lambdas, q = scipy.linalg.eigh(s1, driver="ev")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigensolverError(f"symmetric eigensolver failed for N={mass.size}", size=int(mass.size)) from e

    order = np.argsort(lambdas, kind="stable")
    lambdas, q = lambdas[order], q[:, order]
    pivots = np.argmax(np.abs(q), axis=0)
    signs = np.sign(q[pivots, np.arange(q.shape[1])])
    signs[signs == 0.0] = 1.0
    q = q * signs[None, :]

    t = scale[:, None] * q
    t_inv = q.T * np.sqrt(mass)[None, :]
    logger.debug(
        "eig_pencil: N=%d lambda in [%.3e, %.3e]",
        mass.size, lambdas[0], lambdas[-1],
    )
    return Spectral1D(lambdas=lambdas, t=t, t_inv=t_inv, h=op.mass_inv_stiffness, mass=mass, bc=op.spec.bc)


def mesh_operators(specs: Sequence[MeshSpec1D]) -> List[Operator1D]:
    """Assemble one operator per direction."""
    return [assemble_1d(spec) for spec in specs]
