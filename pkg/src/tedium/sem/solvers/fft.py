"""Second-order periodic Poisson solver diagonalized by the DFT.

The Q^1 periodic stiffness matrix with lumped mass is circulant, so its
eigenvectors are Fourier modes and the fast-diagonalization transform
reduces to ``fftn``/``ifftn``. Higher orders have no such structure; this
module exists as a reference point and as an independent check of Q^1
periodic plans.
"""

from __future__ import annotations

import logging
from typing import Sequence, Tuple

import numpy as np
import numpy.typing as npt
import scipy.fft

from tedium.sem.core.base import FrozenRecord, frozen_array
from tedium.sem.core.config import get_settings
from tedium.sem.core.exceptions import InvalidSpecError, ShapeError, SingularOperatorError
from tedium.sem.solvers.direct import NULL_TOLERANCE, NullspacePolicy
from tedium.sem.tensor.grid import NodalArray

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]


class FftPlan(FrozenRecord):
    """Eigenvalues and multiplier of a periodic Q^1 (alpha - Delta_h)^-1.

    Attributes:
        dims: Points per direction
        spacings: Grid spacing per direction
        eigenvalues: One vector (2 - 2 cos(2 pi j / n)) / h^2 per direction
        alpha: Shift
        multiplier: 1 / (alpha + eigenvalue sum), zero on projected modes
        projected: Number of zeroed modes
    """

    _fields = ("dims", "spacings", "eigenvalues", "alpha", "multiplier", "projected")

    dims: Tuple[int, ...]
    spacings: Tuple[float, ...]
    eigenvalues: Tuple[Array, ...]
    alpha: float
    multiplier: Array
    projected: int

    def __init__(
        self,
        *,
        dims: Sequence[int],
        spacings: Sequence[float],
        eigenvalues: Sequence[npt.ArrayLike],
        alpha: float,
        multiplier: npt.ArrayLike,
        projected: int,
    ) -> None:
        super().__init__(
            dims=tuple(int(n) for n in dims),
            spacings=tuple(float(h) for h in spacings),
            eigenvalues=tuple(frozen_array(e) for e in eigenvalues),
            alpha=float(alpha),
            multiplier=frozen_array(multiplier),
            projected=int(projected),
        )

    def validate(self) -> None:
        if len(self.dims) not in (2, 3) or len(self.spacings) != len(self.dims):
            raise InvalidSpecError("dims", self.dims, "need 2 or 3 directions with one spacing each")
        if self.multiplier.shape != self.dims:
            raise ShapeError("FftPlan", self.dims, tuple(self.multiplier.shape))


def q1_periodic_eigs(n: int, h: float) -> Array:
    """Eigenvalues of the periodic second-difference operator, index order.

    Args:
        n: Number of points, n >= 2
        h: Spacing, h > 0

    Returns:
        Vector (2 - 2 cos(2 pi j / n)) / h^2 for j = 0..n-1
    """
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise InvalidSpecError("n", n, "need at least 2 points")
    if not h > 0.0:
        raise InvalidSpecError("h", h, "spacing must be > 0")
    j = np.arange(n)
    result: Array = (2.0 - 2.0 * np.cos(2.0 * np.pi * j / n)) / h ** 2
    return result


def fft_plan(
    dims: Sequence[int],
    spacings: Sequence[float],
    alpha: float,
    policy: NullspacePolicy = NullspacePolicy.PROJECT,
) -> FftPlan:
    """Plan the DFT solve of alpha U - Delta_h U = F.

    Zero denominators follow the same rule as fast-diagonalization plans:
    below ``1e-10 * (1 + max eigenvalue sum)`` they are projected or rejected.

    Raises:
        InvalidSpecError: If alpha is negative or a size is invalid
        SingularOperatorError: If zero modes exist under REJECT
    """
    if len(dims) != len(spacings) or len(dims) not in (2, 3):
        raise InvalidSpecError("dims", tuple(dims), "need 2 or 3 directions with one spacing each")
    if not np.isfinite(alpha) or alpha < 0.0:
        raise InvalidSpecError("alpha", alpha, "shift must be finite and >= 0")
    eigenvalues = [q1_periodic_eigs(int(n), float(h)) for n, h in zip(dims, spacings)]
    total = eigenvalues[0]
    for e in eigenvalues[1:]:
        total = np.add.outer(total, e)
    denominator = alpha + total
    eps_null = NULL_TOLERANCE * (1.0 + float(np.max(total)))
    singular = np.abs(denominator) < eps_null
    zero_modes = int(np.count_nonzero(singular))
    if zero_modes and NullspacePolicy(policy) is NullspacePolicy.REJECT:
        raise SingularOperatorError(zero_modes, alpha)
    multiplier = np.zeros_like(denominator)
    np.divide(1.0, denominator, out=multiplier, where=~singular)
    logger.debug("fft_plan: dims=%s alpha=%g projected=%d", tuple(dims), alpha, zero_modes)
    return FftPlan(
        dims=dims,
        spacings=spacings,
        eigenvalues=eigenvalues,
        alpha=alpha,
        multiplier=multiplier,
        projected=zero_modes,
    )


def fft_poisson_solve(plan: FftPlan, f: NodalArray) -> NodalArray:
    """Forward DFT, divide by the symbol, inverse DFT, keep the real part.

    Raises:
        ShapeError: If F does not have the plan's dims
    """
    if f.dims != plan.dims:
        raise ShapeError("fft_poisson_solve", plan.dims, f.dims)
    return type(f)(fft_solve_array(plan, f.values))


def fft_solve_array(plan: FftPlan, values: Array) -> Array:
    """Array form of :func:`fft_poisson_solve`; dims are not checked."""
    workers = get_settings().threads
    coefficients = scipy.fft.fftn(values, workers=workers)
    coefficients *= plan.multiplier
    result: Array = np.real(scipy.fft.ifftn(coefficients, workers=workers))
    return result


def q1_periodic_apply(u: NodalArray, spacings: Sequence[float], alpha: float) -> NodalArray:
    """Periodic second-order stencil alpha U - Delta_h U (5- or 7-point)."""
    if len(spacings) != len(u.dims):
        raise InvalidSpecError("spacings", tuple(spacings), f"need one spacing per direction of {u.dims}")
    return type(u)(q1_stencil_array(u.values, spacings, alpha))


def q1_stencil_array(values: Array, spacings: Sequence[float], alpha: float) -> Array:
    """Array form of :func:`q1_periodic_apply`."""
    result = alpha * values
    for axis, h in enumerate(spacings):
        second = np.roll(values, 1, axis=axis) + np.roll(values, -1, axis=axis) - 2.0 * values
        result = result - second / h ** 2
    return result


def periodic_nodes(n: int, a: float, b: float) -> Array:
    """The n grid points a + j (b - a) / n, j = 0..n-1, of a periodic interval."""
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise InvalidSpecError("n", n, "need at least 2 points")
    if not a < b:
        raise InvalidSpecError("interval", (a, b), "need a < b")
    nodes: Array = a + (b - a) / n * np.arange(n)
    return nodes
