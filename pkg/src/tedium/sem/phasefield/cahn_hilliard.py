"""Stabilized BDF2 time stepping for the Cahn-Hilliard equation.

    phi_t = m Delta mu,   mu = -eps Delta phi + F'(phi) / eps,   F(phi) = (phi^2 - 1)^2 / 4

Each step solves, in the shared eigenbasis of -Delta_h (eigenvalue sum s),

    a phi_{n+1} - phi_hat = -m dt s [eps s phi_{n+1} + (S/eps)(phi_{n+1} - phi_bar) + F'(phi_bar)/eps]

with phi_hat = 2 phi_n - phi_{n-1}/2, phi_bar = 2 phi_n - phi_{n-1} and
a = 3/2. The first step is BDF1 (a = 1, phi_hat = phi_bar = phi_0). Both
symbols g_D(s) = 1 / (a + m dt eps s^2 + m dt (S/eps) s) and -s g_D(s) share
one eigenbasis, so a step costs two forward transforms and one inverse.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from scipy import ndimage

from tedium.sem.core.base import FrozenRecord
from tedium.sem.core.exceptions import BlowUpError, InvalidSpecError, ShapeError
from tedium.sem.solvers.direct import (
    Direction,
    SolverPlan,
    apply_array,
    from_eigenbasis,
    operator_factors,
    plan_diagonal,
    spectra_of,
    to_eigenbasis,
)
from tedium.sem.tensor.grid import NodalArray, grid_for, mesh_coordinates, tensor_weights, weighted_mean

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]
Forcing = Callable[[float], npt.ArrayLike]

BDF2_COEFFICIENT = 1.5
BDF1_COEFFICIENT = 1.0


class ChConfig(FrozenRecord):
    """Cahn-Hilliard run parameters.

    Attributes:
        eps: Interface width
        mobility: Mobility m
        dt: Time step
        stab: Linear stabilization coefficient S
        steps: Number of steps ch_run takes
        forcing: Optional source f(t) added to the phi equation
    """

    _fields = ("eps", "mobility", "dt", "stab", "steps", "forcing")

    eps: float
    mobility: float
    dt: float
    stab: float
    steps: int
    forcing: Optional[Forcing]

    def __init__(
        self,
        *,
        eps: float,
        mobility: float,
        dt: float,
        stab: float = 2.0,
        steps: int = 1,
        forcing: Optional[Forcing] = None,
    ) -> None:
        super().__init__(
            eps=float(eps),
            mobility=float(mobility),
            dt=float(dt),
            stab=float(stab),
            steps=steps,
            forcing=forcing,
        )

    def validate(self) -> None:
        for name in ("eps", "mobility", "dt"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise InvalidSpecError(name, value, "must be finite and > 0")
        if not (np.isfinite(self.stab) and self.stab >= 0.0):
            raise InvalidSpecError("stab", self.stab, "must be finite and >= 0")
        if isinstance(self.steps, bool) or not isinstance(self.steps, int) or self.steps < 0:
            raise InvalidSpecError("steps", self.steps, "must be an integer >= 0")


class ChState(FrozenRecord):
    """Two time levels of the phase field plus the BDF2 plans.

    Attributes:
        phi_curr: phi_n
        phi_prev: phi_{n-1}, None before the first step
        step: n
        time: t_n
        plan_d: Symbol g_D at a = 3/2
        plan_dlap: Symbol -s g_D at a = 3/2
    """

    _fields = ("phi_curr", "phi_prev", "step", "time", "plan_d", "plan_dlap")

    phi_curr: NodalArray
    phi_prev: Optional[NodalArray]
    step: int
    time: float
    plan_d: SolverPlan
    plan_dlap: SolverPlan

    def __init__(
        self,
        *,
        phi_curr: NodalArray,
        phi_prev: Optional[NodalArray],
        step: int,
        time: float,
        plan_d: SolverPlan,
        plan_dlap: SolverPlan,
    ) -> None:
        super().__init__(
            phi_curr=phi_curr,
            phi_prev=phi_prev,
            step=int(step),
            time=float(time),
            plan_d=plan_d,
            plan_dlap=plan_dlap,
        )

    def validate(self) -> None:
        if self.phi_curr.dims != self.plan_d.dims:
            raise ShapeError("ChState", self.plan_d.dims, self.phi_curr.dims)
        if self.phi_prev is None and self.step > 0:
            raise InvalidSpecError("phi_prev", None, "required after the first step")
        if self.phi_prev is not None and self.phi_prev.dims != self.phi_curr.dims:
            raise ShapeError("ChState", self.phi_curr.dims, self.phi_prev.dims)


def ch_symbols(lambda_sum: Array, cfg: ChConfig, a: float) -> Tuple[Array, Array]:
    """g_D and g_DLap = -s g_D evaluated on an eigenvalue-sum grid."""
    md = cfg.mobility * cfg.dt
    g_d = 1.0 / (a + md * cfg.eps * lambda_sum ** 2 + md * (cfg.stab / cfg.eps) * lambda_sum)
    return g_d, -lambda_sum * g_d


def ch_plans(
    ops: Sequence[Direction],
    cfg: ChConfig,
    a: float = BDF2_COEFFICIENT,
) -> Tuple[SolverPlan, SolverPlan]:
    """Build the plans for D = (a + m dt eps Delta^2 - m dt (S/eps) Delta)^-1 and D Delta.

    Args:
        ops: Operator1D or Spectral1D per direction
        cfg: Run parameters
        a: Time-derivative coefficient, 3/2 for BDF2 and 1 for BDF1

    Returns:
        Tuple (plan_D, plan_DLap) sharing one eigenbasis
    """
    if not a > 0.0:
        raise InvalidSpecError("a", a, "must be > 0")
    plan_d = plan_diagonal(spectra_of(ops), lambda s: ch_symbols(s, cfg, a)[0])
    _, g_dlap = ch_symbols(plan_d.lambda_sum, cfg, a)
    return plan_d, plan_d.with_multiplier(g_dlap)


def ch_initial_state(ops: Sequence[Direction], cfg: ChConfig, phi0: NodalArray, time: float = 0.0) -> ChState:
    """State at step 0 with the BDF2 plans built."""
    plan_d, plan_dlap = ch_plans(ops, cfg)
    return ChState(phi_curr=phi0, phi_prev=None, step=0, time=time, plan_d=plan_d, plan_dlap=plan_dlap)


def double_well_derivative(phi: Array) -> Array:
    """F'(phi) = phi^3 - phi."""
    result: Array = phi ** 3 - phi
    return result


def double_well(phi: Array) -> Array:
    """F(phi) = (phi^2 - 1)^2 / 4."""
    result: Array = 0.25 * (phi ** 2 - 1.0) ** 2
    return result


def ch_step(state: ChState, cfg: ChConfig) -> ChState:
    """Advance one step; the first step of a run is BDF1.

    Raises:
        BlowUpError: If the new phase field is not finite
    """
    phi_n = state.phi_curr.values
    if state.phi_prev is None:
        g_d, g_dlap = ch_symbols(state.plan_d.lambda_sum, cfg, BDF1_COEFFICIENT)
        phi_hat = phi_n
        phi_bar = phi_n
    else:
        g_d, g_dlap = state.plan_d.multiplier, state.plan_dlap.multiplier
        phi_prev = state.phi_prev.values
        phi_hat = 2.0 * phi_n - 0.5 * phi_prev
        phi_bar = 2.0 * phi_n - phi_prev

    time = state.time + cfg.dt
    if cfg.forcing is not None:
        phi_hat = phi_hat + cfg.dt * np.asarray(cfg.forcing(time), dtype=np.float64)

    md = cfg.mobility * cfg.dt
    explicit = (md * cfg.stab / cfg.eps) * phi_bar - (md / cfg.eps) * double_well_derivative(phi_bar)
    spectra = state.plan_d.spectra
    coefficients = g_d * to_eigenbasis(spectra, np.asfortranarray(phi_hat))
    coefficients -= g_dlap * to_eigenbasis(spectra, np.asfortranarray(explicit))
    phi_next = from_eigenbasis(spectra, coefficients)

    step = state.step + 1
    if not np.all(np.isfinite(phi_next)):
        raise BlowUpError(step, time=time)
    logger.debug("ch_step: n=%d t=%.6g max|phi|=%.6g", step, time, float(np.max(np.abs(phi_next))))
    return state.replace(phi_curr=grid_for(phi_next), phi_prev=state.phi_curr, step=step, time=time)


def ch_energy(phi: NodalArray, ops: Sequence[Direction], cfg: ChConfig) -> float:
    """Discrete free energy (eps/2) <phi, K phi> + (1/eps) sum w F(phi).

    K phi is the assembled stiffness applied by mode contractions, i.e. the
    mass weights times the H-sum.

    Raises:
        ShapeError: If phi does not match the operators
    """
    factors = operator_factors(ops)
    weights = tensor_weights([op.mass for op in ops])
    values = phi.values
    if values.shape != weights.shape:
        raise ShapeError("ch_energy", tuple(weights.shape), phi.dims)
    gradient = float(np.sum(weights * values * apply_array(factors, values, 0.0)))
    bulk = float(np.sum(weights * double_well(values)))
    return 0.5 * cfg.eps * gradient + bulk / cfg.eps


def ch_mass(phi: NodalArray, weights: Array) -> float:
    """Quadrature-weighted mean of phi."""
    return weighted_mean(phi, weights)


def droplet_initial(
    nodes: Sequence[npt.ArrayLike],
    eps: float,
    radius: float = 0.35,
    centers: Sequence[Sequence[float]] = ((0.0, 0.0, 0.37), (0.0, 0.0, -0.37)),
) -> NodalArray:
    """Diffuse-interface droplets, +1 inside and -1 outside.

    phi = (len(centers) - 1) - sum_c tanh((|x - c| - R) / (sqrt(2) eps)),
    which for two centers is 1 - tanh(...) - tanh(...).
    """
    if not eps > 0.0:
        raise InvalidSpecError("eps", eps, "must be > 0")
    if not radius > 0.0:
        raise InvalidSpecError("radius", radius, "must be > 0")
    coords = mesh_coordinates(nodes)
    values = np.full(coords[0].shape, float(len(centers) - 1))
    for center in centers:
        if len(center) != len(coords):
            raise InvalidSpecError("centers", tuple(center), f"need {len(coords)} coordinates")
        distance = np.sqrt(sum((c - x0) ** 2 for c, x0 in zip(coords, center)))
        values -= np.tanh((distance - radius) / (np.sqrt(2.0) * eps))
    return grid_for(values)


def count_components(phi: NodalArray) -> int:
    """Number of face-connected components of {phi > 0} on the nodal grid."""
    _, count = ndimage.label(phi.values > 0.0)
    return int(count)


def ch_run(
    ops: Sequence[Direction],
    cfg: ChConfig,
    phi0: NodalArray,
    observer: Optional[Callable[[ChState], None]] = None,
) -> ChState:
    """Take cfg.steps steps from phi0.

    The observer sees the initial state and then every new state.
    """
    spectra = spectra_of(ops)
    state = ch_initial_state(spectra, cfg, phi0)
    if observer is not None:
        observer(state)
    for _ in range(cfg.steps):
        state = ch_step(state, cfg)
        if observer is not None:
            observer(state)
    logger.info("ch_run: %d steps to t=%.6g", state.step, state.time)
    return state
