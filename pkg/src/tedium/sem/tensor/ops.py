"""Mode-wise matrix contractions on 3D nodal arrays.

The three contractions apply a matrix along one index of an x-fastest
array, which realizes Kronecker-product matrix-vector products without
reshaping:

    mode1: Y(i,j,k) = sum_p A(i,p) U(p,j,k)
    mode2: Y(i,j,k) = sum_p A(j,p) U(i,p,k)
    mode3: Y(i,j,k) = sum_p A(k,p) U(i,j,p)

Work is split over the outermost index (k for modes 1 and 2, j for mode 3)
with a fixed static partition on a shared thread pool, so repeated calls
with the same thread count give bitwise-identical results.
"""

from __future__ import annotations

import atexit
import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import numpy.typing as npt

from tedium.sem.core.config import get_settings
from tedium.sem.core.exceptions import ShapeError
from tedium.sem.tensor.grid import Grid3

logger = logging.getLogger(__name__)

Array = npt.NDArray[np.float64]

# Slabs smaller than this are not worth a thread hand-off.
_MIN_SLAB_ENTRIES = 1 << 15

# One pool per worker count; pools live until interpreter exit.
_executors: Dict[int, ThreadPoolExecutor] = {}
_executor_lock = threading.Lock()


def _get_executor(threads: int) -> ThreadPoolExecutor:
    with _executor_lock:
        executor = _executors.get(threads)
        if executor is None:
            executor = ThreadPoolExecutor(max_workers=threads, thread_name_prefix=f"tedium-sem-{threads}")
            _executors[threads] = executor
        return executor


def _shutdown_executors() -> None:
    with _executor_lock:
        for executor in _executors.values():
            executor.shutdown(wait=False)
        _executors.clear()


atexit.register(_shutdown_executors)


def static_partition(n: int, parts: int) -> List[Tuple[int, int]]:
    """Split range(n) into at most ``parts`` contiguous, nearly equal blocks."""
    parts = max(1, min(parts, n))
    bounds = np.linspace(0, n, parts + 1).round().astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]


def _run_blocks(n_outer: int, work: int, kernel: Callable[[int, int], None], threads: Optional[int]) -> None:
    count = get_settings().threads if threads is None else threads
    if count <= 1 or n_outer <= 1 or work < _MIN_SLAB_ENTRIES:
        kernel(0, n_outer)
        return
    blocks = static_partition(n_outer, count)
    futures = [_get_executor(count).submit(kernel, lo, hi) for lo, hi in blocks]
    for future in futures:
        future.result()


def _check(a: Array, u: Array, axis: int, operation: str) -> None:
    if u.ndim != 3:
        raise ShapeError(operation, (0, 0, 0), tuple(u.shape))
    if a.ndim != 2 or a.shape[1] != u.shape[axis]:
        rows = a.shape[0] if a.ndim == 2 else 0
        raise ShapeError(operation, (rows, u.shape[axis]), tuple(a.shape), grid=tuple(u.shape))


def mode1(a: Array, u: Array, threads: Optional[int] = None) -> Array:
    """Array-level mode-1 contraction; see module docstring."""
    _check(a, u, 0, "mode1_apply")
    out = np.empty((a.shape[0], u.shape[1], u.shape[2]), order="F")

    def kernel(lo: int, hi: int) -> None:
        out[:, :, lo:hi] = np.tensordot(a, u[:, :, lo:hi], axes=(1, 0))

    _run_blocks(u.shape[2], u.size, kernel, threads)
    return out


def mode2(a: Array, u: Array, threads: Optional[int] = None) -> Array:
    """Array-level mode-2 contraction; see module docstring."""
    _check(a, u, 1, "mode2_apply")
    out = np.empty((u.shape[0], a.shape[0], u.shape[2]), order="F")

    def kernel(lo: int, hi: int) -> None:
        out[:, :, lo:hi] = np.tensordot(u[:, :, lo:hi], a, axes=(1, 1)).transpose(0, 2, 1)

    _run_blocks(u.shape[2], u.size, kernel, threads)
    return out


def mode3(a: Array, u: Array, threads: Optional[int] = None) -> Array:
    """Array-level mode-3 contraction; see module docstring."""
    _check(a, u, 2, "mode3_apply")
    out = np.empty((u.shape[0], u.shape[1], a.shape[0]), order="F")

    def kernel(lo: int, hi: int) -> None:
        out[:, lo:hi, :] = np.tensordot(u[:, lo:hi, :], a, axes=(2, 1))

    _run_blocks(u.shape[1], u.size, kernel, threads)
    return out


def mode1_apply(a: npt.ArrayLike, u: Grid3) -> Grid3:
    """Contract the first (x) index: Y(i,j,k) = sum_p A(i,p) U(p,j,k).

    Raises:
        ShapeError: If A has the wrong column count
    """
    return Grid3(mode1(np.asarray(a, dtype=np.float64), u.values))


def mode2_apply(a: npt.ArrayLike, u: Grid3) -> Grid3:
    """Contract the second (y) index: Y(i,j,k) = sum_p A(j,p) U(i,p,k).

    Raises:
        ShapeError: If A has the wrong column count
    """
    return Grid3(mode2(np.asarray(a, dtype=np.float64), u.values))


def mode3_apply(a: npt.ArrayLike, u: Grid3) -> Grid3:
    """Contract the third (z) index: Y(i,j,k) = sum_p A(k,p) U(i,j,p).

    Raises:
        ShapeError: If A has the wrong column count
    """
    return Grid3(mode3(np.asarray(a, dtype=np.float64), u.values))


def kron_apply(a1: npt.ArrayLike, a2: npt.ArrayLike, a3: npt.ArrayLike, u: Grid3) -> Grid3:
    """Apply (A3^T kron A2^T kron A1) to vec(U) by three contractions.

    A1 multiplies x from the left; A2 and A3 are right-multiplied along y and
    z, so the output dims are (rows of A1, columns of A2, columns of A3).

    Args:
        a1: Factor acting on x, shape (m1, Nx)
        a2: Factor acting on y, shape (Ny, m2)
        a3: Factor acting on z, shape (Nz, m3)
        u: Input grid

    Returns:
        Grid of dims (m1, m2, m3)

    Raises:
        ShapeError: If a factor does not match the grid
    """
    m1 = np.asarray(a1, dtype=np.float64)
    m2 = np.asarray(a2, dtype=np.float64)
    m3 = np.asarray(a3, dtype=np.float64)
    y = mode1(m1, u.values)
    y = mode2(m2.T, y)
    y = mode3(m3.T, y)
    return Grid3(y)


def apply_factors(factors: Tuple[Array, ...], u: Array, threads: Optional[int] = None) -> Array:
    """Apply one left-acting factor per direction (2D or 3D arrays).

    ``factors[d]`` acts on index d as ``sum_p A(i,p) U(..p..)``; in 2D this
    is ``A0 @ U @ A1^T``.
    """
    if u.ndim == 2:
        a0, a1 = factors
        if a0.shape[1] != u.shape[0] or a1.shape[1] != u.shape[1]:
            raise ShapeError("apply_factors", tuple(u.shape), (a0.shape[1], a1.shape[1]))
        result: Array = np.asfortranarray(a0 @ u @ a1.T)
        return result
    y = mode1(factors[0], u, threads)
    y = mode2(factors[1], y, threads)
    return mode3(factors[2], y, threads)
