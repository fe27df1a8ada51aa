"""Subcommand implementations.

Each ``run_*`` function takes a validated RunConfig and returns a
CommandResult: the CSV table to print or write plus the process exit code.
Timings cover the online solves only; plan construction is reported
separately when ``time_offline`` is set.
"""

from __future__ import annotations

import logging
import math
import time
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Set, Tuple, TypeVar

import numpy as np

from tedium.sem.cli.config import RunConfig
from tedium.sem.core.base import FrozenRecord
from tedium.sem.core.exceptions import ConfigError, ValidationError
from tedium.sem.discretization.sem1d import BoundaryCondition, MeshSpec1D, Operator1D, mesh_operators
from tedium.sem.io.tables import Cell, CsvStream, output_directory, write_csv
from tedium.sem.io.vtk import lattice_geometry, write_structured_points
from tedium.sem.manufactured import SeparableField, dirichlet_solution, neumann_solution, sine_product
from tedium.sem.phasefield.cahn_hilliard import (
    ChConfig,
    ChState,
    ch_energy,
    ch_mass,
    ch_run,
    count_components,
    droplet_initial,
)
from tedium.sem.solvers.direct import plan_poisson, solve
from tedium.sem.solvers.fft import fft_plan, fft_poisson_solve, periodic_nodes, q1_periodic_apply
from tedium.sem.solvers.krylov import (
    ForcingKind,
    PcgConfig,
    pcg_solve,
    pcg_solve_fft,
    schrodinger_analytic_forcing,
    schrodinger_exact,
    schrodinger_forcing,
    schrodinger_potential,
)
from tedium.sem.tensor.grid import grid_for, tensor_weights, weighted_l2

logger = logging.getLogger(__name__)

T = TypeVar("T")

EXIT_OK = 0
EXIT_NOT_CONVERGED = 3

MIN_BENCH_SIZES = 4
MIN_BENCH_RANGE = 16.0


class CommandResult(FrozenRecord):
    """A CSV table and the exit code of one subcommand."""

    _fields = ("header", "rows", "exit_code")

    header: Tuple[str, ...]
    rows: Tuple[Tuple[Cell, ...], ...]
    exit_code: int

    def __init__(self, *, header: Sequence[str], rows: Sequence[Sequence[Cell]], exit_code: int = EXIT_OK) -> None:
        super().__init__(header=tuple(header), rows=tuple(tuple(r) for r in rows), exit_code=exit_code)

    def validate(self) -> None:
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValidationError("result row does not match the header", value=row, header=self.header)


class BenchRecord(FrozenRecord):
    """Online timing of one benchmark size.

    Attributes:
        size: Per-direction DoF target that was requested
        dofs: Total degrees of freedom N
        repeats: Timed solves
        time_total: Seconds for all timed solves
        exponent: Fitted log-log slope of the whole sweep, once known
    """

    _fields = ("size", "dofs", "repeats", "time_total", "exponent")

    size: int
    dofs: int
    repeats: int
    time_total: float
    exponent: Optional[float]

    def __init__(self, *, size: int, dofs: int, repeats: int, time_total: float, exponent: Optional[float] = None) -> None:
        super().__init__(size=size, dofs=dofs, repeats=repeats, time_total=float(time_total), exponent=exponent)

    def validate(self) -> None:
        if self.dofs < 1 or self.repeats < 1 or self.time_total < 0.0:
            raise ValidationError("invalid benchmark record", value=(self.dofs, self.repeats, self.time_total))

    @property
    def time_per_solve(self) -> float:
        return self.time_total / self.repeats


def mesh_specs(cfg: RunConfig, cells: int, order: Optional[int] = None) -> List[MeshSpec1D]:
    """One identical mesh per direction."""
    a, b = cfg.domain
    k = cfg.order if order is None else order
    return [MeshSpec1D(order=k, cells=cells, a=a, b=b, bc=cfg.bc) for _ in range(cfg.dim)]


def timed(call: Callable[[], T], repeat: int) -> Tuple[T, float]:
    """Run ``call`` once untimed, then ``repeat`` times on a monotonic clock."""
    result = call()
    start = time.perf_counter()
    for _ in range(repeat):
        result = call()
    return result, time.perf_counter() - start


def observed_order(prev: Optional[Tuple[int, float]], cells: int, error: float) -> Optional[float]:
    """log(e_prev / e_curr) / log(n_curr / n_prev), None for the first mesh."""
    if prev is None or prev[0] == cells or error <= 0.0 or prev[1] <= 0.0:
        return None
    return math.log(prev[1] / error) / math.log(cells / prev[0])


def manufactured_for(bc: BoundaryCondition, dim: int) -> SeparableField:
    if bc is BoundaryCondition.DIRICHLET:
        return dirichlet_solution(dim)
    if bc is BoundaryCondition.NEUMANN:
        return neumann_solution(dim)
    return sine_product(dim)


def run_poisson(cfg: RunConfig) -> CommandResult:
    """Accuracy study of alpha u - Delta u = f on the manufactured solution for cfg.bc."""
    field = manufactured_for(cfg.bc, cfg.dim)
    header = ["cells", "dofs", "l2_error", "order", "time_total", "time_per_solve"]
    if cfg.time_offline:
        header.append("time_offline")
    rows: List[List[Cell]] = []
    prev: Optional[Tuple[int, float]] = None
    for cells in cfg.cells:
        start = time.perf_counter()
        ops = mesh_operators(mesh_specs(cfg, cells))
        plan = plan_poisson(ops, cfg.alpha)
        offline = time.perf_counter() - start
        if plan.projected:
            logger.warning("poisson: %d zero mode(s) projected out, the error includes the mean", plan.projected)
        nodes = [op.nodes for op in ops]
        rhs = field.forcing(nodes, cfg.alpha)
        u, total = timed(lambda: solve(plan, rhs), cfg.repeat)
        error = weighted_l2(u - field.values(nodes), plan.weights)
        order = observed_order(prev, cells, error)
        logger.info("poisson: cells=%d dofs=%d error=%.3e order=%s", cells, u.size, error, order)
        row: List[Cell] = [cells, u.size, error, order, total, total / cfg.repeat]
        if cfg.time_offline:
            row.append(offline)
        rows.append(row)
        prev = (cells, error)
    return CommandResult(header=header, rows=rows)


def fit_exponent(dofs: Sequence[int], times: Sequence[float]) -> float:
    """Least-squares slope of log(time) against log(N)."""
    slope, _ = np.polyfit(np.log(np.asarray(dofs, dtype=np.float64)), np.log(np.asarray(times)), 1)
    return float(slope)


def run_bench_scaling(cfg: RunConfig) -> CommandResult:
    """Time repeated online solves over a size sweep and fit the complexity exponent.

    SEM sizes become ``round(size / order)`` cells per direction; FFT sizes
    are grid points per direction.

    Raises:
        ConfigError: With fewer than 4 sizes or less than a 16x range in N
    """
    if len(cfg.sizes) < MIN_BENCH_SIZES:
        raise ConfigError(f"bench needs at least {MIN_BENCH_SIZES} sizes", value=cfg.sizes, key="sizes")
    rng = np.random.default_rng(cfg.seed)
    records: List[BenchRecord] = []
    for size in cfg.sizes:
        if cfg.solver == "fft":
            a, b = cfg.domain
            dims = (size,) * cfg.dim
            fplan = fft_plan(dims, ((b - a) / size,) * cfg.dim, cfg.alpha)
            rhs = grid_for(rng.standard_normal(dims))
            _, total = timed(lambda: fft_poisson_solve(fplan, rhs), cfg.repeat)
        else:
            plan = plan_poisson(mesh_operators(mesh_specs(cfg, max(1, round(size / cfg.order)))), cfg.alpha)
            rhs = grid_for(rng.standard_normal(plan.dims))
            _, total = timed(lambda: solve(plan, rhs), cfg.repeat)
        records.append(BenchRecord(size=size, dofs=rhs.size, repeats=cfg.repeat, time_total=total))
        logger.info("bench: size=%d dofs=%d per_solve=%.3e", size, rhs.size, total / cfg.repeat)

    dofs = [r.dofs for r in records]
    if max(dofs) < MIN_BENCH_RANGE * min(dofs):
        raise ConfigError("bench sizes must span at least a 16x range in N", value=cfg.sizes, key="sizes")
    exponent = fit_exponent(dofs, [max(r.time_per_solve, 1e-12) for r in records])
    logger.info("bench: fitted exponent %.3f", exponent)
    records = [r.replace(exponent=exponent) for r in records]
    header = ["size", "dofs", "repeats", "time_total", "time_per_solve", "exponent"]
    rows = [[r.size, r.dofs, r.repeats, r.time_total, r.time_per_solve, r.exponent] for r in records]
    return CommandResult(header=header, rows=rows)


def run_schrodinger(cfg: RunConfig) -> CommandResult:
    """PCG solves of alpha u - Delta u + V u = f with V = beta prod sin^2(pi x / 4)."""
    pcg_cfg = PcgConfig(
        rel_tol=cfg.tol,
        max_iters=cfg.max_iters,
        alpha=cfg.alpha,
        beta_bound=cfg.beta,
        shift_fraction=cfg.shift_fraction,
    )
    header = ["cells", "dofs", "beta", "iterations", "converged", "final_residual", "l2_error", "time_solve"]
    rows: List[List[Cell]] = []
    history: List[List[Cell]] = []
    exit_code = EXIT_OK
    for cells in cfg.cells:
        ops = mesh_operators(mesh_specs(cfg, cells))
        plan = plan_poisson(ops, pcg_cfg.preconditioner_shift)
        nodes = [op.nodes for op in ops]
        potential = schrodinger_potential(cfg.beta, nodes)
        rhs = schrodinger_forcing(ops, cfg.alpha, potential, ForcingKind(cfg.forcing))

        def record(iteration: int, residual: float, cells: int = cells) -> None:
            history.append([cells, iteration, residual])

        start = time.perf_counter()
        u, report = pcg_solve(plan.spectra, potential, rhs, pcg_cfg, preconditioner=plan, callback=record)
        elapsed = time.perf_counter() - start
        error = weighted_l2(u - schrodinger_exact(nodes), plan.weights)
        if not report.converged:
            exit_code = EXIT_NOT_CONVERGED
        rows.append([cells, u.size, cfg.beta, report.iterations, report.converged, report.final_residual, error, elapsed])
    if cfg.history is not None:
        write_csv(cfg.history, ["cells", "iteration", "rel_residual"], history)
    return CommandResult(header=header, rows=rows, exit_code=exit_code)


def snapshot_steps(snapshots: Sequence[float], dt: float, steps: int) -> Set[int]:
    """Step indices closest to the requested snapshot times within the run."""
    wanted = {int(round(t / dt)) for t in snapshots if t >= 0.0}
    return {n for n in wanted if n <= steps}


def run_ch(cfg: RunConfig) -> CommandResult:
    """Two-droplet coalescence run with energy/mass tracking and VTK snapshots.

    Energy rows are written as the steps complete, so a run that blows up
    still leaves the history up to the failing step.

    Raises:
        ConfigError: If more than one mesh size is given
    """
    if len(cfg.cells) != 1:
        raise ConfigError("ch runs on a single mesh, give one cells value", value=cfg.cells, key="cells")
    ops: List[Operator1D] = mesh_operators(mesh_specs(cfg, cfg.cells[0]))
    nodes = [op.nodes for op in ops]
    weights = tensor_weights([op.mass for op in ops])
    ch_cfg = ChConfig(eps=cfg.eps, mobility=cfg.mobility, dt=cfg.dt, stab=cfg.stab, steps=cfg.steps)
    phi0 = droplet_initial(nodes, cfg.eps, radius=cfg.radius, centers=cfg.centers)
    wanted = snapshot_steps(cfg.snapshots, cfg.dt, cfg.steps)
    origin, spacing = lattice_geometry(nodes)
    if cfg.vtk_dir is not None:
        output_directory(cfg.vtk_dir)

    energies: List[Tuple[float, float]] = []
    snapshots_written: List[Path] = []
    table = CsvStream(cfg.energy_csv, ["step", "time", "energy", "mass"]) if cfg.energy_csv is not None else None

    def observe(state: ChState) -> None:
        energy = ch_energy(state.phi_curr, ops, ch_cfg)
        mass = ch_mass(state.phi_curr, weights)
        energies.append((energy, mass))
        if table is not None:
            table.write([state.step, state.time, energy, mass])
        if cfg.vtk_dir is not None and state.step in wanted:
            target = Path(cfg.vtk_dir) / f"phi_{state.step:06d}.vtk"
            snapshots_written.append(write_structured_points(target, state.phi_curr, origin, spacing))

    try:
        final = ch_run(ops, ch_cfg, phi0, observer=observe)
    finally:
        if table is not None:
            table.close()

    values = np.array([e for e, _ in energies], dtype=np.float64)
    masses = np.array([m for _, m in energies], dtype=np.float64)
    increase = float(np.max(np.diff(values), initial=0.0))
    if increase > 1e-8 * abs(values[0]):
        logger.warning("ch: energy increased by %.3e during the run", increase)
    header = [
        "steps",
        "time",
        "energy_initial",
        "energy_final",
        "max_energy_increase",
        "mass_drift",
        "components_initial",
        "components_final",
        "snapshots",
    ]
    row: List[Cell] = [
        final.step,
        final.time,
        float(values[0]),
        float(values[-1]),
        increase,
        float(np.max(np.abs(masses - masses[0]))),
        count_components(phi0),
        count_components(final.phi_curr),
        len(snapshots_written),
    ]
    return CommandResult(header=header, rows=[row])


def run_compare(cfg: RunConfig) -> CommandResult:
    """Spectral-element solves against the DFT-based solver, per cfg.problem."""
    if cfg.problem == "schrodinger":
        return run_compare_schrodinger(cfg)
    return run_compare_poisson(cfg)


def run_compare_poisson(cfg: RunConfig) -> CommandResult:
    """Q^1 periodic fast diagonalization against the DFT solver on random data."""
    rng = np.random.default_rng(cfg.seed)
    header = ["cells", "dofs", "rel_difference", "stencil_residual", "time_sem", "time_fft"]
    rows: List[List[Cell]] = []
    for cells in cfg.cells:
        plan = plan_poisson(mesh_operators(mesh_specs(cfg, cells, order=1)), cfg.alpha)
        a, b = cfg.domain
        spacings = ((b - a) / cells,) * cfg.dim
        fplan = fft_plan(plan.dims, spacings, cfg.alpha)
        values = rng.standard_normal(plan.dims)
        if plan.projected:
            values -= values.mean()
        rhs = grid_for(values)
        u_sem, time_sem = timed(lambda: solve(plan, rhs), cfg.repeat)
        u_fft, time_fft = timed(lambda: fft_poisson_solve(fplan, rhs), cfg.repeat)
        difference = (u_sem - u_fft).max_abs() / max(u_fft.max_abs(), np.finfo(float).tiny)
        residual = (q1_periodic_apply(u_fft, spacings, cfg.alpha) - rhs).max_abs() / rhs.max_abs()
        logger.info("compare: cells=%d difference=%.3e residual=%.3e", cells, difference, residual)
        rows.append([cells, rhs.size, difference, residual, time_sem / cfg.repeat, time_fft / cfg.repeat])
    return CommandResult(header=header, rows=rows)


def run_compare_schrodinger(cfg: RunConfig) -> CommandResult:
    """PCG on Q^k with the fast-diagonalization preconditioner against PCG on
    the second-order periodic grid with the DFT preconditioner.

    Both discretizations get cells * order points per direction and the
    analytic right-hand side of :func:`schrodinger_exact`. Errors are
    discrete L2 norms against the exact solution.
    """
    pcg_cfg = PcgConfig(
        rel_tol=cfg.tol,
        max_iters=cfg.max_iters,
        alpha=cfg.alpha,
        beta_bound=cfg.beta,
        shift_fraction=cfg.shift_fraction,
    )
    a, b = cfg.domain
    header = [
        "cells",
        "dofs",
        "beta",
        "iterations_sem",
        "time_sem",
        "error_sem",
        "iterations_fft",
        "time_fft",
        "error_fft",
    ]
    rows: List[List[Cell]] = []
    exit_code = EXIT_OK
    for cells in cfg.cells:
        ops = mesh_operators(mesh_specs(cfg, cells))
        nodes = [op.nodes for op in ops]
        plan = plan_poisson(ops, pcg_cfg.preconditioner_shift)
        potential = schrodinger_potential(cfg.beta, nodes)
        rhs = schrodinger_forcing(ops, cfg.alpha, potential)
        (u_sem, sem_report), time_sem = timed(
            lambda: pcg_solve(plan.spectra, potential, rhs, pcg_cfg, preconditioner=plan), cfg.repeat
        )
        error_sem = weighted_l2(u_sem - schrodinger_exact(nodes), plan.weights)

        n = cells * cfg.order
        grid_nodes = [periodic_nodes(n, a, b) for _ in range(cfg.dim)]
        spacings = ((b - a) / n,) * cfg.dim
        fplan = fft_plan((n,) * cfg.dim, spacings, pcg_cfg.preconditioner_shift)
        grid_potential = schrodinger_potential(cfg.beta, grid_nodes)
        grid_rhs = schrodinger_analytic_forcing(grid_nodes, cfg.alpha, grid_potential)
        (u_fft, fft_report), time_fft = timed(
            lambda: pcg_solve_fft(spacings, grid_potential, grid_rhs, pcg_cfg, preconditioner=fplan), cfg.repeat
        )
        cell_volume = float(np.prod(spacings))
        error_fft = math.sqrt(cell_volume * float(np.sum((u_fft - schrodinger_exact(grid_nodes)).values ** 2)))

        if not (sem_report.converged and fft_report.converged):
            exit_code = EXIT_NOT_CONVERGED
        logger.info(
            "compare: cells=%d iterations sem=%d fft=%d errors sem=%.3e fft=%.3e",
            cells, sem_report.iterations, fft_report.iterations, error_sem, error_fft,
        )
        rows.append(
            [
                cells,
                u_sem.size,
                cfg.beta,
                sem_report.iterations,
                time_sem / cfg.repeat,
                error_sem,
                fft_report.iterations,
                time_fft / cfg.repeat,
                error_fft,
            ]
        )
    return CommandResult(header=header, rows=rows, exit_code=exit_code)


COMMAND_RUNNERS = {
    "poisson": run_poisson,
    "schrodinger": run_schrodinger,
    "ch": run_ch,
    "compare": run_compare,
    "bench": run_bench_scaling,
}
