"""Picard solution of X_z = x0 + int_[0,z] b(zeta, X_zeta) dzeta + B_lo(z) + B_hi(z)
on the grid, with comparison, uniqueness and Krylov-type checks.

The drift of each cell is evaluated at its lower-left node, so node (i, j)
depends only on nodes strictly below and to the left of it. Picard iteration
therefore reaches the discrete fixed point after at most n sweeps; the
iteration is kept (rather than a single forward sweep) so that the fixed
point property and the uniqueness surrogate are checked the same way for
every drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import special, stats

from fracsheet.errors import DomainError, NonConvergenceError
from fracsheet.fraccalc import Field2D, Grid2D
from fracsheet.girsanov import DriftSpec, case_a_psi_batch, log_density
from fracsheet.kernels import HurstOrdering, HurstPair, sigma2_grid
from fracsheet.simulate import (
    McConfig,
    NoisePair,
    increments_batch,
    mean_and_se,
    run_chunks,
    sheet_values,
    volterra_values,
)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 200


@dataclass
class SolveResult:
    X: Field2D
    iterations: int
    residual: float
    converged: bool
    history: list = field(default_factory=list)


def _drift_integral(b: DriftSpec, s: np.ndarray, t: np.ndarray, X: np.ndarray, h: float) -> np.ndarray:
    """sum over cells in [0, z] of b(lower-left node, X) h^2, for stacks too."""
    cells = b(s[:-1, :-1], t[:-1, :-1], X[..., :-1, :-1]) * (h * h)
    out = np.zeros(X.shape)
    out[..., 1:, 1:] = np.cumsum(np.cumsum(cells, axis=-2), axis=-1)
    return out


def picard_values(
    b: DriftSpec,
    noise_total: np.ndarray,
    grid: Grid2D,
    x0: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, int, float, list]:
    """Picard iteration on raw arrays; ``noise_total`` may be a stack of paths.

    The default start is the drift-free solution x0 + noise, so b = 0 stops
    after one sweep.
    """
    if b.growth_c is None and b.bound_M is None:
        raise DomainError("drift must declare growth_c or bound_M")
    s, t = grid.mesh()
    base = x0 + np.asarray(noise_total, dtype=float)
    X = base.copy() if start is None else np.array(np.broadcast_to(start, base.shape), dtype=float)
    history = []
    for k in range(1, max_iter + 1):
        nxt = base + _drift_integral(b, s, t, X, grid.h)
        change = float(np.max(np.abs(nxt - X))) if nxt.size else 0.0
        history.append(change)
        X = nxt
        if change <= tol:
            return X, k, change, history
    return X, max_iter, history[-1], history


def solve_picard(
    b: DriftSpec,
    noise: NoisePair,
    x0: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    start: Optional[np.ndarray] = None,
) -> SolveResult:
    """Fixed point of the discrete equation; raises NonConvergenceError after max_iter."""
    X, k, res, hist = picard_values(b, noise.total, noise.grid, x0, tol, max_iter, start)
    if res > tol:
        raise NonConvergenceError(f"Picard did not converge in {max_iter} iterations (residual {res:.3e}); history tail {hist[-5:]}")
    # the axes carry x0 exactly: both noise sheets and the drift integral vanish there
    return SolveResult(X=Field2D(noise.grid, X), iterations=k, residual=res, converged=True, history=hist)


def linear_series_discrete(c: float, grid: Grid2D, x0: float = 1.0) -> np.ndarray:
    """Exact solution of the discrete scheme for b = c x without noise.

    X_ij = x0 sum_m (c h^2)^m C(i, m) C(j, m).
    """
    n = grid.n
    idx = np.arange(n)
    out = np.zeros((n, n))
    q = c * grid.h * grid.h
    for m in range(n):
        ci = special.comb(idx, m)
        if not np.any(ci):
            break
        out += q**m * np.outer(ci, ci)
    return x0 * out


def linear_series_continuous(c: float, s, t, x0: float = 1.0, terms: int = 80) -> np.ndarray:
    """x0 sum_k (c s t)^k / (k!)^2, the solution of the linear hyperbolic equation."""
    z = c * np.asarray(s, dtype=float) * np.asarray(t, dtype=float)
    total = np.zeros(z.shape)
    term = np.ones(z.shape)
    for k in range(terms):
        if k:
            term = term * z / (k * k)
        total = total + term
    return x0 * total


def apriori_bound(b: DriftSpec, noise: NoisePair, x0: float) -> float:
    """(|x0| + ||B_lo|| + ||B_hi|| + c T^2) exp(c T^2) with c the growth constant.

    A bounded drift with bound M satisfies the growth condition with c = M.
    """
    c = b.growth_c if b.growth_c is not None else b.bound_M
    T = noise.grid.T
    lo = float(np.max(np.abs(noise.B_lo.values)))
    hi = float(np.max(np.abs(noise.B_hi.values)))
    return (abs(x0) + lo + hi + c * T * T) * math.exp(c * T * T)


# comparison and uniqueness


@dataclass
class ComparisonReport:
    violations: int
    worst: float
    min_gap: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def comparison_test(b1: DriftSpec, b2: DriftSpec, noise: NoisePair, x0: float, samples: int = 256) -> ComparisonReport:
    """Solve with both drifts on the same noise and count nodes where X1 > X2."""
    if not (b1.monotone and b2.monotone):
        raise DomainError("comparison needs both drifts flagged monotone (nondecreasing in x)")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(noise.seed, spawn_key=(noise.path,))))
    s = rng.uniform(0, noise.grid.T, samples)
    t = rng.uniform(0, noise.grid.T, samples)
    x = rng.normal(0, 3, samples)
    if np.any(b1(s, t, x) > b2(s, t, x)):
        raise DomainError("comparison needs b1 <= b2 pointwise")
    X1 = solve_picard(b1, noise, x0).X.values
    X2 = solve_picard(b2, noise, x0).X.values
    diff = X1 - X2
    return ComparisonReport(violations=int(np.sum(diff > 0)), worst=float(diff.max()), min_gap=float((X2 - X1).min()))


@dataclass
class UniquenessReport:
    max_gap: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_gap <= 2 * self.tol


def uniqueness_surrogate(b: DriftSpec, noise: NoisePair, x0: float, tol: float = DEFAULT_TOL) -> UniquenessReport:
    """Picard from X^0 = x0 and from X^0 = x0 + noise reach the same fixed point."""
    a = solve_picard(b, noise, x0, tol, start=np.full(noise.total.shape, float(x0)))
    c = solve_picard(b, noise, x0, tol, start=x0 + noise.total)
    return UniquenessReport(max_gap=float(np.max(np.abs(a.X.values - c.X.values))), tol=tol)


# law comparison


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    n1: int
    n2_effective: float

    def passed(self, level: float = 0.01) -> bool:
        return self.pvalue > level


def weighted_ks_2samp(x: np.ndarray, y: np.ndarray, wy: np.ndarray) -> KSResult:
    """Two-sample KS between an unweighted sample x and a weighted sample y.

    The weighted sample enters through its weighted ECDF and Kish's effective
    size (sum w)^2 / sum w^2; the p-value is the asymptotic Kolmogorov tail.
    """
    x = np.sort(np.asarray(x, dtype=float))
    order = np.argsort(y, kind="stable")
    y = np.asarray(y, dtype=float)[order]
    w = np.asarray(wy, dtype=float)[order]
    if np.any(w < 0) or not np.isfinite(w).all() or w.sum() <= 0:
        raise DomainError("weights must be finite, non-negative and not all zero")
    pts = np.concatenate([x, y])
    fx = np.searchsorted(x, pts, side="right") / len(x)
    cw = np.concatenate([[0.0], np.cumsum(w)]) / w.sum()
    fy = cw[np.searchsorted(y, pts, side="right")]
    d = float(np.max(np.abs(fx - fy)))
    n2 = float(w.sum() ** 2 / np.sum(w * w))
    n1 = len(x)
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return KSResult(statistic=d, pvalue=float(stats.kstwobign.sf(en * d)), n1=n1, n2_effective=n2)


@dataclass(frozen=True)
class LawSamples:
    picard: np.ndarray
    reweighted: np.ndarray
    weights: np.ndarray


def law_samples_case_a(
    b: DriftSpec, rough: HurstPair, grid: Grid2D, x0: float, mc: McConfig, chunk: int = 1024
) -> LawSamples:
    """X_(T,T) from Picard on paths 0..P-1 and x0 + B_lo + B_hi weighted by L_T on paths P..2P-1.

    The two halves use disjoint path indices so the samples are independent.
    """
    sheet = HurstPair(0.5, 0.5)
    HurstOrdering(rough, sheet)

    def solved(r: range):
        dW = increments_batch(grid, mc.master_seed, r)
        total = volterra_values(dW, rough, grid) + sheet_values(dW)
        X, _, res, _ = picard_values(b, total, grid, x0)
        if res > DEFAULT_TOL:
            raise NonConvergenceError("Picard did not converge in the law comparison")
        return X[:, -1, -1]

    def weighted(r: range):
        shifted = range(r.start + mc.paths, r.stop + mc.paths)
        dW = increments_batch(grid, mc.master_seed, shifted)
        total = volterra_values(dW, rough, grid) + sheet_values(dW)
        psi = case_a_psi_batch(b, rough, dW, grid, x0)
        return np.stack([x0 + total[:, -1, -1], log_density(psi, dW, grid.h)])

    xs = np.concatenate(run_chunks(solved, mc, chunk)) if mc.paths else np.zeros(0)
    parts = run_chunks(weighted, mc, chunk)
    yw = np.concatenate(parts, axis=1) if parts else np.zeros((2, 0))
    logw = yw[1]
    # normalising by the max keeps exp finite; the ECDF only needs relative weights
    w = np.exp(logw - logw.max()) if logw.size else logw
    return LawSamples(picard=xs, reweighted=yw[0], weights=w)


# Krylov-type estimate


@dataclass(frozen=True)
class KrylovResult:
    radius: float
    lhs: float
    lhs_se: float
    rhs: float
    oracle: Optional[float]

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs > 0 else 0.0

    @property
    def oracle_z(self) -> Optional[float]:
        if self.oracle is None or self.lhs_se == 0:
            return None
        return (self.lhs - self.oracle) / self.lhs_se


def _node_weights(grid: Grid2D) -> np.ndarray:
    """Upper-right cell rule on [0, T]^2: weight h^2 at nodes with i, j >= 1.

    The axes, where X = x0 exactly, carry no weight, as in the continuum.
    """
    w = np.zeros((grid.n, grid.n))
    w[1:, 1:] = grid.h * grid.h
    return w


def occupation(X: np.ndarray, x0: float, radius: float, grid: Grid2D) -> np.ndarray:
    """int 1{|X_z - x0| <= radius} dz by the upper-right rule, per path."""
    ind = (np.abs(X - x0) <= radius).astype(float)
    return np.sum(ind * _node_weights(grid), axis=(-2, -1))


def gaussian_oracle(
    lo: HurstPair, hi: HurstPair, grid: Grid2D, radius: float, var: Optional[np.ndarray] = None
) -> float:
    """E int 1{|B_lo + B_hi| <= radius} dz for b = 0 from the Gaussian marginals.

    ``var`` is sigma2 on the grid; it is computed when omitted.
    """
    if var is None:
        var = sigma2_grid(lo, hi, grid.x)
    sd = np.sqrt(var)
    # the sum vanishes on the axes, where the indicator is 1
    with np.errstate(divide="ignore"):
        prob = np.where(sd > 0, special.erf(radius / (np.sqrt(2.0) * np.where(sd > 0, sd, 1.0))), 1.0)
    return float(np.sum(_node_weights(grid) * prob))


def krylov_estimate(
    b: DriftSpec,
    lo: HurstPair,
    hi: HurstPair,
    grid: Grid2D,
    x0: float,
    radii: Sequence[float],
    rho: float,
    mc: McConfig,
    with_oracle: bool = False,
    chunk: int = 1024,
) -> list[KrylovResult]:
    """MC estimate of E int g(z, X_z) dz for indicators g = 1{|y - x0| <= r}.

    rhs is (int int g^rho dy dz)^(1/rho) = (2 r T^2)^(1/rho). The oracle is
    only available for b = 0.
    """
    HurstOrdering(lo, hi)
    if b.bound_M is None:
        raise DomainError("Krylov estimate needs a bounded drift (bound_M)")
    if rho <= 1.0 + max(lo.alpha, lo.beta):
        raise DomainError(f"rho must exceed 1 + max(alpha, beta) = {1.0 + max(lo.alpha, lo.beta)}")
    radii = [float(r) for r in radii]

    def task(r: range):
        dW = increments_batch(grid, mc.master_seed, r)
        total = volterra_values(dW, lo, grid) + volterra_values(dW, hi, grid)
        X, _, res, _ = picard_values(b, total, grid, x0)
        if res > DEFAULT_TOL:
            raise NonConvergenceError("Picard did not converge in the Krylov estimate")
        return np.stack([occupation(X, x0, rad, grid) for rad in radii], axis=1)

    occ = np.concatenate(run_chunks(task, mc, chunk)) if mc.paths else np.zeros((0, len(radii)))
    var = sigma2_grid(lo, hi, grid.x) if with_oracle else None
    out = []
    for k, rad in enumerate(radii):
        m, se = mean_and_se(occ[:, k])
        if m > 0 and se > 0.1 * m:
            raise NonConvergenceError(f"Krylov MC standard error {se:.3g} exceeds 10% of lhs {m:.3g}")
        rhs = (2.0 * rad * grid.T * grid.T) ** (1.0 / rho) if rad > 0 else 0.0
        oracle = gaussian_oracle(lo, hi, grid, rad, var) if with_oracle else None
        out.append(KrylovResult(radius=rad, lhs=m, lhs_se=se, rhs=rhs, oracle=oracle))
    return out


__all__ = [
    "SolveResult",
    "solve_picard",
    "picard_values",
    "linear_series_discrete",
    "linear_series_continuous",
    "apriori_bound",
    "comparison_test",
    "uniqueness_surrogate",
    "weighted_ks_2samp",
    "law_samples_case_a",
    "krylov_estimate",
    "gaussian_oracle",
]
