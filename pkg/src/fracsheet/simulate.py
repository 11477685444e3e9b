"""Brownian sheet increments and pairs of fractional Brownian sheets driven by
the same sheet, plus reproducible Monte Carlo orchestration.

A sheet with Hurst pair (alpha, beta) is built as
``B = K_alpha @ dW @ K_beta.T`` where ``K_H`` is an n x (n-1) matrix of
per-cell kernel weights (row i, cell k) and ``dW`` holds one increment per
grid cell. Row 0 is zero, so every sheet vanishes on both axes.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

from fracsheet import _core
from fracsheet.fraccalc import Field2D, Grid2D
from fracsheet.kernels import HurstOrdering, HurstPair, kernel_1d

# Gauss nodes per half cell for the weight integrals
CELL_ORDER = 12


def rng_for(master_seed: int, path: int = 0) -> np.random.Generator:
    """Counter-based generator for one path: Philox keyed by (master_seed, path)."""
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(path),))
    return np.random.Generator(np.random.Philox(seq))


def sample_sheet_increments(grid: Grid2D, seed: int, path: int = 0) -> np.ndarray:
    """(n-1) x (n-1) i.i.d. N(0, h^2) increments, one per cell."""
    rng = rng_for(seed, path)
    m = grid.n - 1
    return rng.standard_normal((m, m)) * grid.h


@lru_cache(maxsize=128)
def _jacobi(order: int, p: float):
    return roots_jacobi(order, p, 0.0)


def _cell_integrals(
    H: float, t: float, edges: np.ndarray, power: int, from_origin: bool = True
) -> np.ndarray:
    """int over each cell [edges[k], edges[k+1]] of K_H(t, u)^power du.

    The last cell ends at u = t and, when ``from_origin``, the first starts
    at u = 0; both ends carry a power singularity that is integrated exactly
    by Gauss-Jacobi.
    """
    ncell = len(edges) - 1
    p_end = power * (H - 0.5)
    lo = edges[:-1]
    hi = edges[1:]
    mid = 0.5 * (lo + hi)
    out = np.zeros(ncell)
    for side in (0, 1):
        a = lo if side == 0 else mid
        b = mid if side == 0 else hi
        # singular end of this half, if any
        if side == 0:
            p = np.where((np.arange(ncell) == 0) & from_origin, p_end, 0.0)
        else:
            p = np.where(np.arange(ncell) == ncell - 1, p_end, 0.0)
        for pv in np.unique(p):
            sel = p == pv
            xj, wj = _jacobi(CELL_ORDER, float(pv))
            half = 0.5 * (b[sel] - a[sel])
            if side == 1:
                u = a[sel, None] + half[:, None] * (1.0 + xj[None, :])
                dist = b[sel, None] - u
            else:
                u = b[sel, None] - half[:, None] * (1.0 + xj[None, :])
                dist = u - a[sel, None]
            k = kernel_1d(H, t, u)
            vals = k**power
            if pv != 0.0:
                vals = vals * (dist / half[:, None]) ** (-pv)
            out[sel] += half * np.sum(wj[None, :] * vals, axis=1)
    return out


@lru_cache(maxsize=64)
def cell_weight_matrix(H: float, T: float, n: int) -> np.ndarray:
    """n x (n-1) Volterra weights: row i = node t_i, column k = cell k.

    Cells strictly before the one touching t_i get the cell mean of the
    kernel. The cell touching t_i, where the kernel is singular, gets the
    root mean square instead, so that the one-cell variance is exact; this
    keeps the sampled variance at t_i close to t_i^(2H) at practical n.
    """
    m = np.zeros((n, n - 1))
    if H == 0.5:
        m[np.tril_indices(n, -1, n - 1)] = 1.0
        m.setflags(write=False)
        return m
    h = T / (n - 1)
    x = np.arange(n) * h
    for i in range(1, n):
        edges = x[: i + 1]
        mean = _cell_integrals(H, x[i], edges, 1) / h
        sq = _cell_integrals(H, x[i], edges[-2:], 2, from_origin=(i == 1))[0]
        mean[-1] = math.copysign(math.sqrt(max(sq, 0.0) / h), mean[-1])
        m[i, :i] = mean
    m.setflags(write=False)
    return m


def volterra_values(dW: np.ndarray, hp: HurstPair, grid: Grid2D) -> np.ndarray:
    """Sheet values for one increment array or a stack of them."""
    ka = cell_weight_matrix(hp.alpha, grid.T, grid.n)
    kb = cell_weight_matrix(hp.beta, grid.T, grid.n)
    return _core.tri_apply(ka, dW, kb)


def volterra_transform(dW: np.ndarray, hp: HurstPair, grid: Grid2D) -> Field2D:
    """B(z_ij) = sum over cells in [0, z_ij] of the cell weights times dW."""
    return Field2D(grid, volterra_values(dW, hp, grid))


def sheet_values(dW: np.ndarray) -> np.ndarray:
    """Brownian sheet W on the nodes from its increments (zero on the axes)."""
    dW = np.asarray(dW)
    shape = dW.shape[:-2] + (dW.shape[-2] + 1, dW.shape[-1] + 1)
    out = np.zeros(shape)
    out[..., 1:, 1:] = np.cumsum(np.cumsum(dW, axis=-2), axis=-1)
    return out


@dataclass
class NoisePair:
    grid: Grid2D
    dW: np.ndarray
    B_lo: Field2D
    B_hi: Field2D
    lo: HurstPair
    hi: HurstPair
    seed: int
    path: int = 0

    @property
    def total(self) -> np.ndarray:
        return self.B_lo.values + self.B_hi.values


def sample_noise_pair(lo: HurstPair, hi: HurstPair, grid: Grid2D, seed: int, path: int = 0) -> NoisePair:
    """One increment draw and both transforms applied to it."""
    HurstOrdering(lo, hi)
    dW = sample_sheet_increments(grid, seed, path)
    return NoisePair(
        grid=grid,
        dW=dW,
        B_lo=volterra_transform(dW, lo, grid),
        B_hi=volterra_transform(dW, hi, grid),
        lo=lo,
        hi=hi,
        seed=seed,
        path=path,
    )


def zero_noise(lo: HurstPair, hi: HurstPair, grid: Grid2D) -> NoisePair:
    m = grid.n - 1
    z = Field2D(grid, np.zeros((grid.n, grid.n)))
    return NoisePair(grid, np.zeros((m, m)), z, Field2D(grid, z.values.copy()), lo, hi, seed=0)


# Monte Carlo orchestration


@dataclass(frozen=True)
class McConfig:
    paths: int
    master_seed: int
    workers: int = 1

    def __post_init__(self):
        if self.paths < 0:
            raise ValueError("paths must be >= 0")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


def effective_workers(requested: int) -> int:
    cap = os.environ.get("FRACSHEET_THREADS")
    if cap:
        try:
            return max(1, min(requested, int(cap)))
        except ValueError:
            pass
    return max(1, requested)


def increments_batch(grid: Grid2D, master_seed: int, paths: Sequence[int]) -> np.ndarray:
    """Stack of per-path increments; path k always gets the same array."""
    return np.stack([sample_sheet_increments(grid, master_seed, k) for k in paths])


def _chunks(total: int, size: int) -> list[range]:
    return [range(s, min(s + size, total)) for s in range(0, total, size)]


def run_chunks(task: Callable[[range], object], mc: McConfig, chunk: int = 256) -> list:
    """Run ``task`` on consecutive path ranges; results come back in path order.

    Each task must derive its randomness from the path indices alone (see
    :func:`rng_for`), which makes the output independent of ``workers``.
    """
    parts = _chunks(mc.paths, chunk)
    workers = effective_workers(mc.workers)
    if workers == 1 or len(parts) <= 1:
        return [task(r) for r in parts]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, parts))


def simulate_pairs(lo: HurstPair, hi: HurstPair, grid: Grid2D, mc: McConfig, chunk: int = 256):
    """All paths as stacked arrays (dW, B_lo, B_hi); memory grows with paths."""
    HurstOrdering(lo, hi)

    def task(r: range):
        dW = increments_batch(grid, mc.master_seed, r)
        return dW, volterra_values(dW, lo, grid), volterra_values(dW, hi, grid)

    parts = run_chunks(task, mc, chunk)
    m = grid.n - 1
    if not parts:
        empty = np.zeros((0, grid.n, grid.n))
        return np.zeros((0, m, m)), empty, empty.copy()
    return tuple(np.concatenate(p) for p in zip(*parts))


def mean_and_se(samples: np.ndarray) -> tuple[float, float]:
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        return float(x.mean()) if x.size else 0.0, math.inf
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def covariance_and_se(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Sample covariance of centred Gaussian data and its standard error.

    The fields are mean zero by construction, so the estimator is mean(x y)
    and its SE is the SE of that mean.
    """
    return mean_and_se(np.asarray(x) * np.asarray(y))
