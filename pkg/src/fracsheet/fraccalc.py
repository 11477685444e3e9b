"""Two-parameter left-sided Riemann-Liouville integrals and derivatives on a
uniform grid over [0, T]^2.

Every operator here factors into one-dimensional operators acting along each
axis, so it is stored as a pair of n x n matrices (one per axis) and applied
as ``L @ F @ R.T``. Composite chains multiply the matrices first and touch
the field once.

Integrals use the product-trapezoid rule: the singular weight is integrated
exactly against the piecewise-linear interpolant of the samples. Derivatives
use the Marchaud (Weil) form with the same interpolant, which makes the
two-dimensional derivative the tensor product of the one-dimensional ones.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from fracsheet import _core
from fracsheet.errors import DomainError, GridError, RoughnessWarning
from fracsheet.specfun import gamma, gauss_2f1, rgamma


@dataclass(frozen=True)
class Grid2D:
    """Uniform n x n grid on [0, T]^2, nodes (i h, j h)."""

    T: float
    n: int

    def __post_init__(self):
        if not self.n >= 2:
            raise GridError(f"grid needs at least 2 points per axis, got n={self.n}")
        if not self.T > 0:
            raise GridError(f"horizon must be positive, got T={self.T}")

    @property
    def h(self) -> float:
        return self.T / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.x, indexing="ij")

    def field(self, values) -> "Field2D":
        return Field2D(self, np.asarray(values, dtype=float))

    def from_function(self, fn) -> "Field2D":
        s, t = self.mesh()
        return Field2D(self, np.asarray(np.broadcast_to(fn(s, t), s.shape), dtype=float))

    def coarsen(self) -> "Grid2D":
        """Every other node; needs an odd n."""
        if self.n % 2 == 0 or self.n < 3:
            raise GridError("coarsening needs an odd n >= 3")
        return Grid2D(self.T, (self.n + 1) // 2)


@dataclass
class Field2D:
    """Samples on a grid. ``axis_flag`` marks axis nodes holding a sentinel."""

    grid: Grid2D
    values: np.ndarray
    axis_flag: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise GridError(f"field shape {self.values.shape} does not match grid n={self.grid.n}")

    def interior(self) -> np.ndarray:
        return self.values[1:, 1:]

    def __add__(self, other):
        return Field2D(self.grid, self.values + _vals(other), self.axis_flag)

    def __sub__(self, other):
        return Field2D(self.grid, self.values - _vals(other), self.axis_flag)

    def __mul__(self, other):
        return Field2D(self.grid, self.values * _vals(other), self.axis_flag)

    __rmul__ = __mul__

    def __neg__(self):
        return Field2D(self.grid, -self.values, self.axis_flag)


def _vals(x):
    return x.values if isinstance(x, Field2D) else x


@dataclass(frozen=True)
class FracOrder:
    """Orders (alpha, beta) of a fractional operator, both strictly in (0, 1)."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise DomainError(f"fractional order {name}={v} must lie in (0, 1)")


# chain steps; orders here may be 0 (identity) and integrals may exceed 1


@dataclass(frozen=True)
class Weight:
    """Multiply by s^p t^q."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > -1 and self.q > -1):
            raise DomainError("power weights need p, q > -1")


@dataclass(frozen=True)
class Integral:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha >= 0 and self.beta >= 0):
            raise DomainError("integral orders must be non-negative")


@dataclass(frozen=True)
class Derivative:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0 <= self.alpha <= 1 and 0 <= self.beta <= 1):
            raise DomainError("derivative orders must lie in [0, 1]")


Step = Union[Weight, Integral, Derivative]


# one-dimensional matrices; all cached on (order, n, h) and returned read-only


def _freeze(m: np.ndarray) -> np.ndarray:
    m.setflags(write=False)
    return m


@lru_cache(maxsize=256)
def integral_matrix(alpha: float, n: int, h: float) -> np.ndarray:
    """Product-trapezoid weights for I^alpha at nodes 0..n-1 (row 0 is zero)."""
    if alpha == 0:
        return _freeze(np.eye(n))
    m = np.zeros((n, n))
    i = np.arange(1, n, dtype=float)
    a1 = alpha + 1.0
    scale = h**alpha / gamma(alpha + 2.0)
    # first node
    m[1:, 0] = (i - 1.0) ** a1 - (i - 1.0 - alpha) * i**alpha
    # interior nodes depend on the lag only
    lag = np.arange(1, n, dtype=float)
    inner = (lag + 1.0) ** a1 - 2.0 * lag**a1 + (lag - 1.0) ** a1
    for r in range(2, n):
        # row r, columns 1..r-1 have lags r-1..1
        m[r, 1:r] = inner[r - 2 :: -1][: r - 1]
    m[np.arange(1, n), np.arange(1, n)] = 1.0
    return _freeze(m * scale)


@lru_cache(maxsize=256)
def derivative_matrix(alpha: float, n: int, h: float, first_cell: str = "power") -> np.ndarray:
    """Marchaud-form weights for D^alpha at nodes 0..n-1 (row 0 is zero).

    Every cell uses the linear interpolant except the first one, where
    ``first_cell="power"`` interpolates with g_0 + (g_1 - g_0) (x / h)^alpha.
    That is the generic behaviour at the origin of functions in the range of
    I^alpha, the natural domain of D^alpha; it is exact for constants and cuts
    the D I f error near the axes by an order of magnitude.
    ``first_cell="linear"`` keeps the plain interpolant.
    """
    if first_cell not in ("power", "linear"):
        raise ValueError(f"first_cell must be 'power' or 'linear', got {first_cell!r}")
    if alpha == 0:
        return _freeze(np.eye(n))
    m = np.zeros((n, n))
    if alpha == 1:
        idx = np.arange(1, n)
        m[idx, idx] = 1.0 / h
        m[idx, idx - 1] = -1.0 / h
        return _freeze(m)
    jm = np.arange(0, n - 1, dtype=float)  # m = j - 1 for j = 1..n-1
    pow_int = ((jm + 1.0) ** (1.0 - alpha) - jm ** (1.0 - alpha)) / (1.0 - alpha)
    P = np.empty_like(jm)
    P[0] = np.inf
    P[1:] = (jm[1:] ** (-alpha) - (jm[1:] + 1.0) ** (-alpha)) / alpha
    B = np.empty_like(jm)
    B[0] = 1.0 / (1.0 - alpha)
    B[1:] = pow_int[1:] - jm[1:] * P[1:]
    A = np.zeros_like(jm)
    A[1:] = P[1:] - B[1:]  # A_1 multiplies g_i - g_i = 0
    # index j-1 in A, B
    c = alpha * h ** (-alpha) * rgamma(1.0 - alpha)
    x = np.arange(n) * h
    for i in range(1, n):
        j = np.arange(1, i + 1)
        row = np.zeros(n)
        row[i] = x[i] ** (-alpha) * rgamma(1.0 - alpha) + c * np.sum(A[j - 1] + B[j - 1])
        # g_k from cell k (j = i - k, as left end) and cell k - 1 (j = i - k + 1, right end)
        k = np.arange(0, i)
        row[k] -= c * B[i - k - 1]
        k2 = np.arange(1, i)
        row[k2] -= c * A[i - k2]
        m[i] = row
    if first_cell == "power":
        _power_first_cell(m, alpha, h, c)
    return _freeze(m)


def _power_first_cell(m: np.ndarray, alpha: float, h: float, c: float) -> None:
    """Swap the linear first-cell term for the x^alpha one, in place.

    Written as (g_i - g_0) P - (g_1 - g_0) A on that cell, only A changes:
    it becomes Q_i = int_0^1 u^alpha (i - u)^(-alpha - 1) du. For i = 1 the
    cell is also the singular one and the whole term becomes
    (g_1 - g_0) (pi alpha / sin(pi alpha) - 1) / alpha.
    """
    n = m.shape[0]
    e1 = (math.pi * alpha / math.sin(math.pi * alpha) - 1.0) / alpha
    delta = c * (e1 - 1.0 / (1.0 - alpha))
    m[1, 1] += delta
    m[1, 0] -= delta
    if n < 3:
        return
    i = np.arange(2, n, dtype=float)
    X = 1.0 / (i - 1.0)
    # w = u / (i - u) turns Q_i into int_0^X w^alpha / (1 + w) dw
    Q = X ** (alpha + 1.0) / (alpha + 1.0) * gauss_2f1(1.0, alpha + 1.0, alpha + 2.0, -X)
    mm = i - 1.0
    P = (mm ** (-alpha) - (mm + 1.0) ** (-alpha)) / alpha
    B = ((mm + 1.0) ** (1.0 - alpha) - mm ** (1.0 - alpha)) / (1.0 - alpha) - mm * P
    corr = c * (Q - (P - B))
    rows = np.arange(2, n)
    m[rows, 1] -= corr
    m[rows, 0] += corr


def axis_weight_value(p: float, h: float) -> float:
    """Value used for x^p at x = 0.

    For p < 0 this is the cell-average factor that makes the first trapezoid
    cell exact for a product x^p * x^r when r = -p; see ``weight_matrix``.
    """
    if p == 0:
        return 1.0
    if p > 0:
        return 0.0
    return h**p * (1.0 - p) / (1.0 + p)


@lru_cache(maxsize=256)
def weight_matrix(p: float, n: int, h: float) -> np.ndarray:
    x = np.arange(n) * h
    d = np.empty(n)
    d[1:] = x[1:] ** p
    d[0] = axis_weight_value(p, h)
    return _freeze(np.diag(d))


def _step_matrices(step: Step, n: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(step, Weight):
        return weight_matrix(step.p, n, h), weight_matrix(step.q, n, h)
    if isinstance(step, Integral):
        return integral_matrix(step.alpha, n, h), integral_matrix(step.beta, n, h)
    if isinstance(step, Derivative):
        return derivative_matrix(step.alpha, n, h), derivative_matrix(step.beta, n, h)
    raise TypeError(f"unknown chain step {step!r}")


def chain_matrices(steps: Sequence[Step], n: int, h: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis matrices of a chain applied left to right."""
    left = np.eye(n)
    right = np.eye(n)
    for step in steps:
        ls, rs = _step_matrices(step, n, h)
        left = ls @ left
        right = rs @ right
    return left, right


def apply_axes(left: np.ndarray, values: np.ndarray, right: np.ndarray) -> np.ndarray:
    """left @ values @ right.T; values may carry leading batch dimensions."""
    return _core.tri_apply(left, values, right)


def weighted_chain(f: Field2D, steps: Sequence[Step]) -> Field2D:
    """Apply weights, integrals and derivatives left to right.

    Axis nodes of derivative outputs are set to 0 inside a chain; use
    :func:`rl_derivative` for the flagged user-level derivative.
    """
    if not steps:
        return Field2D(f.grid, f.values.copy(), f.axis_flag)
    g = f.grid
    left, right = chain_matrices(steps, g.n, g.h)
    return Field2D(g, apply_axes(left, f.values, right))


def rl_integral(f: Field2D, order: FracOrder) -> Field2D:
    """I^{alpha,beta}_{0+} f sampled on the grid; zero on both axes."""
    g = f.grid
    left = integral_matrix(order.alpha, g.n, g.h)
    right = integral_matrix(order.beta, g.n, g.h)
    return Field2D(g, apply_axes(left, f.values, right))


# Marchaud derivative with an optional nonlinear singular-cell correction


HOLDER_FLOOR_GAP = 0.05
# relative discrepancy between the h and 2h derivative above which we warn
ROUGHNESS_TOL = 0.25


def _holder_correction_1d(values: np.ndarray, alpha: float, h: float) -> np.ndarray:
    """Replace the linear singular-cell term along axis 0 by a power-law one.

    With g_i - g(y) ~ dg * (r / h)^theta on the cell next to x_i, the cell
    contributes alpha h^-alpha dg / (theta - alpha) instead of
    alpha h^-alpha dg / (1 - alpha). theta comes from the last two increments.
    """
    out = np.zeros_like(values)
    if alpha in (0.0, 1.0) or values.shape[0] < 3:
        return out
    d1 = values[2:] - values[1:-1]
    d2 = values[2:] - values[:-2]
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.log2(np.abs(d2) / np.abs(d1))
    theta = np.where(np.isfinite(theta), theta, 1.0)
    theta = np.clip(theta, alpha + HOLDER_FLOOR_GAP, 1.0)
    c = alpha * h ** (-alpha) * rgamma(1.0 - alpha)
    out[2:] = c * d1 * (1.0 / (theta - alpha) - 1.0 / (1.0 - alpha))
    return out


def _derivative_values(values: np.ndarray, order: FracOrder, h: float, holder: str) -> np.ndarray:
    n = values.shape[0]
    if holder == "linear":
        return apply_axes(
            derivative_matrix(order.alpha, n, h), values, derivative_matrix(order.beta, n, h)
        )
    if holder != "adaptive":
        raise ValueError(f"holder must be 'linear' or 'adaptive', got {holder!r}")
    ds = derivative_matrix(order.alpha, n, h)
    dt = derivative_matrix(order.beta, n, h)
    # along s, then along t; each pass adds its own singular-cell correction
    first = ds @ values + _holder_correction_1d(values, order.alpha, h)
    first[0] = 0.0
    second = first @ dt.T + _holder_correction_1d(first.T, order.beta, h).T
    second[:, 0] = 0.0
    return second


def rl_derivative(
    f: Field2D, order: FracOrder, *, holder: str = "linear", check: bool = False
) -> Field2D:
    """D^{alpha,beta}_{0+} f sampled on the grid via the Weil representation.

    Interior nodes carry the quadrature value. The formula is singular on
    the axes; an axis line gets 0 when ``f`` vanishes on it and NaN
    otherwise, with ``axis_flag`` set in the latter case.

    ``holder="adaptive"`` models the cell next to each node with a power law
    whose exponent is read off the two finest increments instead of the
    linear interpolant. ``check=True`` compares against the derivative on the
    2h grid and emits :class:`RoughnessWarning` if they disagree by more than
    ``ROUGHNESS_TOL`` in relative L2; this is a heuristic, not a proof of
    convergence.
    """
    g = f.grid
    vals = _derivative_values(f.values, order, g.h, holder)
    flag = False
    if np.any(f.values[0, :] != 0):
        vals[0, :] = np.nan
        flag = True
    else:
        vals[0, :] = 0.0
    if np.any(f.values[:, 0] != 0):
        vals[:, 0] = np.nan
        flag = True
    else:
        vals[:, 0] = 0.0
    if check and g.n >= 5 and g.n % 2 == 1:
        coarse = _derivative_values(f.values[::2, ::2], order, 2 * g.h, holder)
        fine = vals[::2, ::2]
        sl = (slice(1, None), slice(1, None))
        num = np.linalg.norm(fine[sl] - coarse[sl])
        den = np.linalg.norm(fine[sl])
        if den > 0 and num > ROUGHNESS_TOL * den:
            warnings.warn(
                f"fractional derivative changed by {num / den:.2f} (relative L2) between "
                f"h and 2h; the field may be too rough for order {order}",
                RoughnessWarning,
                stacklevel=2,
            )
    return Field2D(g, vals, flag)


def relative_l2(a, b, *, interior: bool = True) -> float:
    """||a - b|| / ||b|| over interior nodes (or all nodes)."""
    av = _vals(a)
    bv = _vals(b)
    if interior:
        av = av[..., 1:, 1:]
        bv = bv[..., 1:, 1:]
    den = np.linalg.norm(bv)
    num = np.linalg.norm(av - bv)
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return float(num / den)
