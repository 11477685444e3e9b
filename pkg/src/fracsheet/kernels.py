"""Volterra kernels of the fractional Brownian sheet, its covariance and the
variance of the summed noise.

The one-dimensional kernel is the hypergeometric (Molchan-Golosov type)
kernel scaled so that ``int_0^t K_H(t, s)^2 ds = t^(2H)``, i.e. so that the
sheet built from it has exactly the covariance returned by
:func:`covariance`. The unscaled kernel has variance ``V_H t^(2H)``; see
:func:`variance_constant`.
"""

from __future__ import annotations

import math
from functools import lru_cache
from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_jacobi

from fracsheet import specfun
from fracsheet.errors import DomainError, NonConvergenceError, OrderingError
from fracsheet.quadrature import composite_rule, graded_edges


@dataclass(frozen=True)
class HurstPair:
    """Hurst indices (alpha, beta) of one sheet, both in (0, 1/2]."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v <= 0.5:
                raise DomainError(f"Hurst index {name}={v} must lie in (0, 1/2]")

    @property
    def a(self) -> float:
        return 0.5 - self.alpha

    @property
    def b(self) -> float:
        return 0.5 - self.beta

    @property
    def is_sheet(self) -> bool:
        return self.alpha == 0.5 and self.beta == 0.5

    def precedes(self, other: "HurstPair") -> bool:
        """Strict componentwise order."""
        return self.alpha < other.alpha and self.beta < other.beta

    def as_tuple(self) -> tuple[float, float]:
        return (self.alpha, self.beta)


@dataclass(frozen=True)
class HurstOrdering:
    lo: HurstPair
    hi: HurstPair = field()

    def __post_init__(self):
        if not self.lo.precedes(self.hi):
            raise OrderingError(
                f"Hurst pairs must satisfy lo < hi componentwise (the strict order), "
                f"got lo={self.lo.as_tuple()} hi={self.hi.as_tuple()}"
            )


def variance_constant(H: float) -> float:
    """V_H with int_0^t K^2 = V_H t^(2H) for the unscaled hypergeometric kernel."""
    if not 0.0 < H <= 0.5:
        raise DomainError("H must lie in (0, 1/2]")
    # cos(pi H) / (1 - 2H) = (pi / 2) sinc(1/2 - H); finite at H = 1/2
    return specfun.gamma(2.0 - 2.0 * H) * float(np.sinc(0.5 - H)) / (2.0 * H)


def kernel_scale(H: float) -> float:
    """Factor turning the unscaled kernel into the unit-variance one."""
    return 1.0 / math.sqrt(variance_constant(H))


def kernel_1d(H: float, t, s):
    """K_H(t, s) for 0 < s < t; vectorised over ``t`` and ``s``."""
    if not 0.0 < H <= 0.5:
        raise DomainError("H must lie in (0, 1/2]")
    t_arr, s_arr = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    if np.any(~(s_arr > 0)) or np.any(~(s_arr < t_arr)):
        raise DomainError("kernel_1d requires 0 < s < t")
    scalar = t_arr.ndim == 0
    if H == 0.5:
        out = np.ones(t_arr.shape)
        return float(out) if scalar else out
    z = 1.0 - t_arr / s_arr
    hyp = specfun.gauss_2f1(H - 0.5, 0.5 - H, H + 0.5, z)
    out = kernel_scale(H) / specfun.gamma(H + 0.5) * (t_arr - s_arr) ** (H - 0.5) * hyp
    return float(out) if scalar else out


def kernel_2d(hp: HurstPair, z, zeta):
    """Product kernel K^{alpha,beta}(z, zeta) = K^alpha(s, u) K^beta(t, v)."""
    s, t = z
    u, v = zeta
    return kernel_1d(hp.alpha, s, u) * kernel_1d(hp.beta, t, v)


def _axis_cov(H: float, x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return x ** (2 * H) + y ** (2 * H) - np.abs(x - y) ** (2 * H)


def covariance(hp: HurstPair, z, zp):
    """R^{alpha,beta}(z, z') of the fractional Brownian sheet.

    The second factor uses 2*beta.
    """
    s, t = z
    sp, tp = zp
    for v in (s, t, sp, tp):
        if np.any(np.asarray(v) < 0):
            raise DomainError("covariance is defined on [0, T]^2")
    return 0.25 * _axis_cov(hp.alpha, s, sp) * _axis_cov(hp.beta, t, tp)


def _kernel_on_rule(H: float, t: float, nodes: np.ndarray) -> np.ndarray:
    return kernel_1d(H, t, nodes)


def kernel_moment(H1: float, H2: float, t: float, quad_n: int = 400, t2: float | None = None) -> float:
    """int_0^m K_{H1}(t, u) K_{H2}(t2, u) du with m = min(t, t2); t2 defaults to t.

    Both ends carry a power singularity. The panels touching 0 and m use
    Gauss-Jacobi with that power divided out; the rest are Gauss-Legendre
    panels graded geometrically toward 0, where the kernel also mixes in the
    weaker power ``u^(1/2 - H)``. ``quad_n`` is roughly the total number of
    nodes.
    """
    t2 = t if t2 is None else t2
    m = min(t, t2)
    if m <= 0:
        return 0.0
    p_left = H1 + H2 - 1.0
    p_right = (H1 - 0.5 if t == m else 0.0) + (H2 - 0.5 if t2 == m else 0.0)
    order = 10
    levels = max(4, quad_n // (2 * order))
    edges = graded_edges(0.0, 0.5 * m, levels, 0.5, True, False)
    x, w = composite_rule(edges[1:], order)

    def f(u):
        return _kernel_on_rule(H1, t, u) * _kernel_on_rule(H2, t2, u)

    total = float(np.sum(w * f(x)))
    jn = max(8, quad_n // 4)
    for lo, hi, p, at_right in ((0.0, edges[1], p_left, False), (0.5 * m, m, p_right, True)):
        xj, wj = _jacobi(jn, p)
        half = 0.5 * (hi - lo)
        # (1 - x)^p on [-1, 1] is (dist / half)^p, dist measured from the singular end
        u = lo + half * (1.0 + xj) if at_right else hi - half * (1.0 + xj)
        dist = (hi - u) if at_right else (u - lo)
        total += float(half * np.sum(wj * f(u) * (dist / half) ** (-p)))
    return total


@lru_cache(maxsize=64)
def _jacobi(order: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    return roots_jacobi(order, p, 0.0)


def _sigma2_unchecked(lo: HurstPair, hi: HurstPair, z, quad_n: int) -> float:
    s, t = z
    if s <= 0 or t <= 0:
        return 0.0
    # (K^lo + K^hi)^2 integrated over the rectangle splits into axis moments
    a_lo = kernel_moment(lo.alpha, lo.alpha, s, quad_n) * kernel_moment(lo.beta, lo.beta, t, quad_n)
    a_hi = kernel_moment(hi.alpha, hi.alpha, s, quad_n) * kernel_moment(hi.beta, hi.beta, t, quad_n)
    cross = kernel_moment(lo.alpha, hi.alpha, s, quad_n) * kernel_moment(lo.beta, hi.beta, t, quad_n)
    return a_lo + a_hi + 2.0 * cross


SIGMA2_REL_TOL = 5e-3


def sigma2(lo: HurstPair, hi: HurstPair, z, quad_n: int = 512) -> float:
    """Variance of B^lo_z + B^hi_z when both sheets share the same driver.

    Computed by graded quadrature with about ``quad_n`` nodes per axis and
    checked against a run with ``2 * quad_n``.
    """
    HurstOrdering(lo, hi)
    s, t = z
    if s <= 0 or t <= 0:
        raise DomainError("sigma2 requires an interior point")
    v1 = _sigma2_unchecked(lo, hi, z, quad_n)
    v2 = _sigma2_unchecked(lo, hi, z, 2 * quad_n)
    if abs(v2 - v1) > SIGMA2_REL_TOL * abs(v2):
        raise NonConvergenceError(f"sigma2 changed by {abs(v2 - v1) / abs(v2):.2e} on doubling quad_n")
    return v2


def sigma_bounds(lo: HurstPair, hi: HurstPair, z) -> tuple[float, float]:
    """Triangle-inequality bounds on sigma(z) in terms of the two axis variances."""
    s, t = z
    base = s**lo.alpha * t**lo.beta
    ratio = s ** (hi.alpha - lo.alpha) * t ** (hi.beta - lo.beta)
    return base * abs(1.0 - ratio), base * (1.0 + ratio)


def _sigma2_grid_unchecked(lo: HurstPair, hi: HurstPair, x: np.ndarray, quad_n: int) -> np.ndarray:
    def moments(h1: float, h2: float) -> np.ndarray:
        return np.array([kernel_moment(h1, h2, v, quad_n) if v > 0 else 0.0 for v in x])

    a_lo = np.outer(moments(lo.alpha, lo.alpha), moments(lo.beta, lo.beta))
    a_hi = np.outer(moments(hi.alpha, hi.alpha), moments(hi.beta, hi.beta))
    cross = np.outer(moments(lo.alpha, hi.alpha), moments(lo.beta, hi.beta))
    return a_lo + a_hi + 2.0 * cross


def sigma2_grid(lo: HurstPair, hi: HurstPair, x, quad_n: int = 512) -> np.ndarray:
    """sigma2 on the tensor grid x by x, zero on the axes.

    The variance factors into axis moments, so this costs O(len(x)) moment
    evaluations instead of one full quadrature per node.
    """
    HurstOrdering(lo, hi)
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("sigma2_grid needs non-negative coordinates")
    v1 = _sigma2_grid_unchecked(lo, hi, x, quad_n)
    v2 = _sigma2_grid_unchecked(lo, hi, x, 2 * quad_n)
    gap = np.abs(v2 - v1)
    if np.any(gap > SIGMA2_REL_TOL * np.abs(v2)):
        raise NonConvergenceError(f"sigma2 changed by {np.max(gap / np.where(v2 > 0, v2, 1)):.2e} on doubling quad_n")
    return v2
