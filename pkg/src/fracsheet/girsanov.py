"""The operator of the Volterra kernel and its inverse, the two Neumann-series
constructions of a drift pair (u, v) with u + v = b, the shift psi and the
Girsanov density L_T.

All operators carry the kernel normalization of :mod:`fracsheet.kernels`:
the integral operator of the unit-variance kernel is ``c_alpha c_beta``
times the classical fractional-integral expression, and its inverse is
divided by the same constant. At (1/2, 1/2) the constant is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from fracsheet.errors import DegenerateOrderingError, DomainError, OrderingError, TruncationError
from fracsheet.fraccalc import (
    Derivative,
    Field2D,
    Grid2D,
    Integral,
    Weight,
    apply_axes,
    chain_matrices,
    relative_l2,
    weighted_chain,
)
from fracsheet.kernels import HurstPair, kernel_scale
from fracsheet.simulate import NoisePair, volterra_values
from fracsheet.specfun import lgamma

DEFAULT_TAIL_TOL = 1e-6
MAX_TERMS = 60
# case (b) term checks: nodewise up to this n, and terms below TERM_FLOOR x ||b|| are not checked
NODEWISE_TERMS = 4
TERM_FLOOR = 1e-12


# drift coefficients


@dataclass(frozen=True)
class DriftSpec:
    """Drift b(z, x), vectorised as ``fn(s, t, x)``, plus declared properties."""

    fn: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
    bound_M: Optional[float] = None
    growth_c: Optional[float] = None
    monotone: bool = False
    name: str = "custom"

    def __call__(self, s, t, x) -> np.ndarray:
        s, t, x = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (s, t, x)))
        out = np.asarray(self.fn(s, t, x), dtype=float)
        out = np.broadcast_to(out, x.shape).copy()
        self._spot_check(out, x)
        return out

    def _spot_check(self, out: np.ndarray, x: np.ndarray) -> None:
        if self.bound_M is not None and np.any(np.abs(out) > self.bound_M * (1 + 1e-12)):
            raise DomainError(f"drift {self.name} exceeds its declared bound M={self.bound_M}")
        if self.growth_c is not None and np.any(
            np.abs(out) > self.growth_c * (1.0 + np.abs(x)) * (1 + 1e-12)
        ):
            raise DomainError(f"drift {self.name} violates its declared linear growth c={self.growth_c}")


def builtin_drift(name: str, c: float = 1.0) -> DriftSpec:
    """Named drifts: zero, const, arctan, cos, linear (c x)."""
    if name == "zero":
        return DriftSpec(lambda s, t, x: np.zeros_like(x), bound_M=0.0, growth_c=0.0, monotone=True, name=name)
    if name == "const":
        return DriftSpec(
            lambda s, t, x: np.full_like(x, c), bound_M=abs(c), growth_c=max(abs(c), 1e-300), monotone=True, name=name
        )
    if name == "arctan":
        return DriftSpec(
            lambda s, t, x: np.arctan(x) + c, bound_M=math.pi / 2 + abs(c), growth_c=math.pi / 2 + abs(c),
            monotone=True, name=name,
        )
    if name == "cos":
        return DriftSpec(lambda s, t, x: c * np.cos(x), bound_M=abs(c), growth_c=max(abs(c), 1e-300), name=name)
    if name == "linear":
        return DriftSpec(lambda s, t, x: c * x, growth_c=max(abs(c), 1e-300), monotone=c >= 0, name=name)
    raise DomainError(f"unknown drift {name!r}; expected zero, const, arctan, cos or linear")


def drift_on_path(b: DriftSpec, noise: NoisePair, x0: float) -> np.ndarray:
    """b(z, x0 + B_lo(z) + B_hi(z)) on every grid node."""
    s, t = noise.grid.mesh()
    return b(s, t, x0 + noise.total)


# kernel operators


def _scale(hp: HurstPair) -> float:
    return kernel_scale(hp.alpha) * kernel_scale(hp.beta)


def k_forward(h: Field2D, hp: HurstPair) -> Field2D:
    """(K h)(s, t) = int_{[0,(s,t)]} K(z, zeta) h(zeta) dzeta via fractional integrals."""
    a, b = hp.a, hp.b
    steps = [Weight(-a, -b), Integral(a, b), Weight(a, b), Integral(2 * hp.alpha, 2 * hp.beta)]
    return weighted_chain(h, steps) * _scale(hp)


def inverse_smooth_steps(hp: HurstPair) -> list:
    a, b = hp.a, hp.b
    return [Weight(a, b), Integral(a, b), Weight(-a, -b)]


def k_inverse_smooth(u: Field2D, hp: HurstPair) -> Field2D:
    """Inverse operator applied to h = int u, given the density u directly.

    psi(s, t) = s^-a t^-b I^{a,b}(s^a t^b u) / c. Zero on the axes. For the
    Brownian sheet the operator is the identity and psi = u exactly.
    """
    if hp.is_sheet:
        return Field2D(u.grid, u.values.copy())
    return weighted_chain(u, inverse_smooth_steps(hp)) * (1.0 / _scale(hp))


def k_inverse_general(h: Field2D, hp: HurstPair) -> Field2D:
    """Inverse operator through two fractional derivatives (rough inputs allowed)."""
    a, b = hp.a, hp.b
    steps = [Derivative(2 * hp.alpha, 2 * hp.beta), Weight(-a, -b), Derivative(a, b), Weight(a, b)]
    return weighted_chain(h, steps) * (1.0 / _scale(hp))


def primitive(u: Field2D) -> Field2D:
    """int_{[0,z]} u by the trapezoid rule (I^{1,1})."""
    return weighted_chain(u, [Integral(1.0, 1.0)])


# drift pairs


@dataclass
class DriftPair:
    u: Field2D
    v: Field2D
    psi: Field2D
    truncation_N: int
    residual: float
    case: str
    psi_alt: Optional[Field2D] = None
    terms: list = field(default_factory=list)

    @property
    def psi_gap(self) -> float:
        """Relative L2 gap between the two ways of computing psi."""
        if self.psi_alt is None:
            return 0.0
        return relative_l2(self.psi_alt, self.psi)


def _check_strict(lo: HurstPair, hi: HurstPair) -> None:
    if lo.alpha == hi.alpha or lo.beta == hi.beta:
        raise DegenerateOrderingError(
            f"Hurst pairs share a component (lo={lo.as_tuple()}, hi={hi.as_tuple()}); "
            "the drift constructions need a strict order"
        )
    if not lo.precedes(hi):
        raise OrderingError(f"need lo < hi componentwise, got lo={lo.as_tuple()} hi={hi.as_tuple()}")


def case_a_term_bound(a: float, b: float, n: int, bsup: float, kappa: float, T: float) -> float:
    """Bound on sup |term n| of the case (a) series for v on [0, T]^2.

    |s^-a t^-b I^{na,nb}(s^a t^b g)| <= ||g|| Gamma(a+1) Gamma(b+1) /
    (Gamma((n+1)a+1) Gamma((n+1)b+1)) s^{na} t^{nb} by the power rule.
    """
    if n == 0:
        return bsup
    log = (
        n * math.log(kappa)
        + lgamma(a + 1.0)
        + lgamma(b + 1.0)
        - lgamma((n + 1) * a + 1.0)
        - lgamma((n + 1) * b + 1.0)
        + n * (a + b) * math.log(T)
    )
    return bsup * math.exp(log)


def case_a_truncation(a: float, b: float, bsup: float, kappa: float, T: float, tol: float) -> int:
    """Smallest N whose next-term bound is below ``tol`` (relative to bsup)."""
    for N in range(1, MAX_TERMS + 1):
        if case_a_term_bound(a, b, N + 1, 1.0, kappa, T) < tol:
            return N
    return MAX_TERMS


def build_drift_pair_case_a(
    b: DriftSpec,
    rough: HurstPair,
    noise: NoisePair,
    x0: float,
    N: Optional[int] = None,
    tol: float = DEFAULT_TAIL_TOL,
) -> DriftPair:
    """Drift pair when one sheet is the Brownian sheet itself.

    ``rough`` is the fractional pair (a, b exponents taken from it); the
    other pair is (1/2, 1/2), whose inverse operator is the identity, so
    psi = u. With kappa = 1 / c_rough,

        v = s^-a t^-b sum_n (-kappa)^n I^{na,nb}(s^a t^b b),   u = psi = b - v.

    ``residual`` is the bound on the first omitted term at (T, T); if it
    exceeds ``tol`` a :class:`TruncationError` is raised.
    """
    grid = noise.grid
    if rough.is_sheet:
        raise DegenerateOrderingError("case (a) needs a rough pair different from (1/2, 1/2)")
    a, bb = rough.a, rough.b
    kappa = 1.0 / _scale(rough)
    bvals = drift_on_path(b, noise, x0)
    bsup = float(np.max(np.abs(bvals))) if bvals.size else 0.0
    if N is None:
        N = case_a_truncation(a, bb, bsup, kappa, grid.T, tol)
    residual = case_a_term_bound(a, bb, N + 1, bsup, kappa, grid.T)
    if residual > tol * max(bsup, 1.0):
        raise TruncationError(
            f"case (a) tail bound {residual:.3e} exceeds tolerance {tol:.1e} at N={N}; increase N", residual
        )
    bf = Field2D(grid, bvals)
    v = bvals.copy()
    terms = [bvals.copy()]
    for n in range(1, N + 1):
        term = weighted_chain(bf, [Weight(a, bb), Integral(n * a, n * bb), Weight(-a, -bb)]).values
        term *= (-kappa) ** n
        terms.append(term)
        v += term
    u = bvals - v
    vf = Field2D(grid, v)
    psi = Field2D(grid, u)
    psi_alt = k_inverse_smooth(vf, rough)
    return DriftPair(
        u=Field2D(grid, u), v=vf, psi=psi, truncation_N=N, residual=residual, case="a", psi_alt=psi_alt, terms=terms
    )


def case_a_psi_batch(
    b: DriftSpec, rough: HurstPair, dW: np.ndarray, grid: Grid2D, x0: float, N: Optional[int] = None,
    tol: float = DEFAULT_TAIL_TOL,
) -> np.ndarray:
    """psi for a stack of increment arrays, case (a); same series as the single-path builder."""
    if rough.is_sheet:
        raise DegenerateOrderingError("case (a) needs a rough pair different from (1/2, 1/2)")
    from fracsheet.simulate import sheet_values

    a, bb = rough.a, rough.b
    kappa = 1.0 / _scale(rough)
    s, t = grid.mesh()
    total = volterra_values(dW, rough, grid) + sheet_values(dW)
    bvals = b(s, t, x0 + total)
    bsup = float(np.max(np.abs(bvals))) if bvals.size else 0.0
    if N is None:
        N = case_a_truncation(a, bb, bsup, kappa, grid.T, tol)
    v = bvals.copy()
    for n in range(1, N + 1):
        left, right = chain_matrices([Weight(a, bb), Integral(n * a, n * bb), Weight(-a, -bb)], grid.n, grid.h)
        v += (-kappa) ** n * apply_axes(left, bvals, right)
    return bvals - v


def generator_steps(a: float, b: float, ap: float, bp: float) -> list:
    """Chain for T = D^{a',b'} s^{a'-a} t^{b'-b} I^{a,b} (s^{a-a'} t^{b-b'} .)."""
    return [Weight(a - ap, b - bp), Integral(a, b), Weight(ap - a, bp - b), Derivative(ap, bp)]


def generator_matrices(grid: Grid2D, a: float, b: float, ap: float, bp: float):
    return chain_matrices(generator_steps(a, b, ap, bp), grid.n, grid.h)


def build_drift_pair_case_b(
    b: DriftSpec,
    lo: HurstPair,
    hi: HurstPair,
    noise: NoisePair,
    x0: float,
    N: Optional[int] = None,
    tol: float = DEFAULT_TAIL_TOL,
    slack: float = 10.0,
) -> DriftPair:
    """Drift pair for two fractional sheets lo < hi < (1/2, 1/2).

    With a, b from ``lo``, a', b' from ``hi`` and rho = c_hi / c_lo,

        u~ = sum_n (-rho)^n T^n (s^a' t^b' b),   u = s^-a' t^-b' u~,   v = b - u,
        psi = s^-a t^-b I^{a,b}(s^a t^b u) / c_lo.

    ``psi_alt`` recomputes psi from v through the hi inverse. Term norms are
    checked against the C_n recursion; a term exceeding ``slack`` times its
    bound raises :class:`TruncationError`.
    """
    from fracsheet import bounds

    _check_strict(lo, hi)
    if hi.is_sheet or hi.alpha == 0.5 or hi.beta == 0.5:
        raise DomainError("case (b) needs hi strictly below (1/2, 1/2); use case (a) for the sheet")
    grid = noise.grid
    a, bb, ap, bp = lo.a, lo.b, hi.a, hi.b
    rho = _scale(hi) / _scale(lo)
    bvals = drift_on_path(b, noise, x0)
    bsup = float(np.max(np.abs(bvals))) if bvals.size else 0.0
    exp = bounds.ExponentPack(a, bb, ap, bp)
    if N is None:
        N = bounds.choose_truncation(exp, grid.T, rho, tol)
    seq = bounds.run_recursions(exp, 1.0, N + 1)
    s, t = grid.mesh()
    left, right = generator_matrices(grid, a, bb, ap, bp)
    wl, wr = chain_matrices([Weight(ap, bp)], grid.n, grid.h)
    il, ir = chain_matrices([Weight(-ap, -bp)], grid.n, grid.h)
    cur = apply_axes(wl, bvals, wr)  # s^a' t^b' b
    u = bvals.copy()
    terms = [bvals.copy()]
    for n in range(1, N + 1):
        cur = apply_axes(left, cur, right)
        term = (-rho) ** n * apply_axes(il, cur, ir)
        # f_n = s^{a-a'} t^{b-b'} T^n(...) against C_n s^{gamma(n)} t^{gamma~(n)}:
        # nodewise for the first terms, in sup norm afterwards (the grid cannot
        # resolve s^{gamma(n)} near the axes once gamma(n) is large)
        fn = np.abs(cur[1:, 1:]) * s[1:, 1:] ** (a - ap) * t[1:, 1:] ** (bb - bp)
        if n <= NODEWISE_TERMS:
            bound = bsup * seq.C[n] * s[1:, 1:] ** exp.gamma_s(n) * t[1:, 1:] ** exp.gamma_t(n)
        else:
            fn = fn.max()
            bound = bsup * seq.C[n] * grid.T ** (exp.gamma_s(n) + exp.gamma_t(n))
        if np.any(fn > slack * bound + TERM_FLOOR * bsup):
            raise TruncationError(
                f"case (b) term {n} exceeds {slack} x its C_n bound; the series is not decaying as expected",
                float(np.max(fn - bound)),
            )
        terms.append(term)
        u += term
    residual = bsup * rho ** (N + 1) * seq.C[N + 1] * grid.T ** (exp.gamma_s(N + 1) + exp.gamma_t(N + 1))
    if residual > tol * max(bsup, 1.0):
        raise TruncationError(f"case (b) tail bound {residual:.3e} exceeds {tol:.1e} at N={N}", residual)
    v = bvals - u
    uf = Field2D(grid, u)
    vf = Field2D(grid, v)
    psi = k_inverse_smooth(uf, lo)
    psi_alt = k_inverse_smooth(vf, hi)
    return DriftPair(u=uf, v=vf, psi=psi, truncation_N=N, residual=residual, case="b", psi_alt=psi_alt, terms=terms)


def case_b_psi_batch(
    b: DriftSpec, lo: HurstPair, hi: HurstPair, dW: np.ndarray, grid: Grid2D, x0: float, N: Optional[int] = None,
    tol: float = DEFAULT_TAIL_TOL,
) -> np.ndarray:
    """psi for a stack of increment arrays, case (b); same series as the single-path builder."""
    from fracsheet import bounds

    _check_strict(lo, hi)
    a, bb, ap, bp = lo.a, lo.b, hi.a, hi.b
    rho = _scale(hi) / _scale(lo)
    s, t = grid.mesh()
    bvals = b(s, t, x0 + volterra_values(dW, lo, grid) + volterra_values(dW, hi, grid))
    if N is None:
        N = bounds.choose_truncation(bounds.ExponentPack(a, bb, ap, bp), grid.T, rho, tol)
    left, right = generator_matrices(grid, a, bb, ap, bp)
    wl, wr = chain_matrices([Weight(ap, bp)], grid.n, grid.h)
    il, ir = chain_matrices([Weight(-ap, -bp)], grid.n, grid.h)
    cur = apply_axes(wl, bvals, wr)
    u = bvals.copy()
    for n in range(1, N + 1):
        cur = apply_axes(left, cur, right)
        u += (-rho) ** n * apply_axes(il, cur, ir)
    pl, pr = chain_matrices(inverse_smooth_steps(lo), grid.n, grid.h)
    return apply_axes(pl, u, pr) * (1.0 / _scale(lo))


def psi_batch(
    b: DriftSpec, lo: HurstPair, hi: HurstPair, dW: np.ndarray, grid: Grid2D, x0: float, N: Optional[int] = None,
    tol: float = DEFAULT_TAIL_TOL,
) -> np.ndarray:
    """psi for a stack of paths, case picked as in :func:`build_drift_pair`."""
    if hi.is_sheet:
        if not lo.precedes(hi):
            raise OrderingError("need lo < hi componentwise")
        return case_a_psi_batch(b, lo, dW, grid, x0, N, tol)
    return case_b_psi_batch(b, lo, hi, dW, grid, x0, N, tol)


def build_drift_pair(
    b: DriftSpec, lo: HurstPair, hi: HurstPair, noise: NoisePair, x0: float, N: Optional[int] = None,
    tol: float = DEFAULT_TAIL_TOL,
) -> DriftPair:
    """Pick case (a) when hi is the Brownian sheet, case (b) otherwise."""
    if hi.is_sheet:
        if not lo.precedes(hi):
            raise OrderingError("need lo < hi componentwise")
        return build_drift_pair_case_a(b, lo, noise, x0, N, tol)
    return build_drift_pair_case_b(b, lo, hi, noise, x0, N, tol)


# Girsanov density


def psi_on_cells(psi: Field2D) -> np.ndarray:
    """psi at the lower-left node of every cell."""
    return psi.values[:-1, :-1]


def log_density(psi, dW: np.ndarray, h: float) -> np.ndarray:
    """log L_T = sum psi dW - 1/2 sum psi^2 h^2; accepts stacks of paths."""
    pv = psi.values if isinstance(psi, Field2D) else np.asarray(psi)
    pc = pv[..., :-1, :-1]
    return np.sum(pc * dW, axis=(-2, -1)) - 0.5 * h * h * np.sum(pc * pc, axis=(-2, -1))


@dataclass(frozen=True)
class Density:
    value: float
    log: float


def density_LT(psi: Field2D, dW: np.ndarray) -> Density:
    """Radon-Nikodym density with psi taken at each cell's lower-left node."""
    if not np.all(np.isfinite(psi.values[1:, 1:])):
        raise DomainError("psi must be finite on interior nodes")
    lg = float(log_density(psi, dW, psi.grid.h))
    value = math.exp(lg) if lg < 700 else math.inf
    return Density(value=value, log=lg)


# shifted sheet


@dataclass(frozen=True)
class ShiftCheck:
    identity_defect: float
    primitive_gap: float


def shifted_sheet_check(noise: NoisePair, pair: DriftPair, hp: HurstPair, u: Field2D) -> ShiftCheck:
    """B - K(psi) equals the transform of W - int psi, and K(psi) ~ int u.

    ``u`` is the drift part carried by the sheet ``hp``: pair.u for the
    Brownian sheet in case (a), pair.v for the rough one.

    ``identity_defect`` is the sup difference between the two sides of the
    discrete identity (rounding only). ``primitive_gap`` is the relative L2
    gap between the cell-weight transform of psi and the trapezoid primitive
    of u, a discretization error.
    """
    grid = noise.grid
    h = grid.h
    shift = psi_on_cells(pair.psi) * h * h
    B = volterra_values(noise.dW, hp, grid)
    lhs = B - volterra_values(shift, hp, grid)
    rhs = volterra_values(noise.dW - shift, hp, grid)
    defect = float(np.max(np.abs(lhs - rhs)))
    gap = relative_l2(volterra_values(shift, hp, grid), primitive(u))
    return ShiftCheck(identity_defect=defect, primitive_gap=gap)


def novikov_fit(psis, totals) -> tuple[float, float, float]:
    """Smallest c with sup|psi| <= c (1 + ||B_lo + B_hi||) on each half of the paths.

    Returns (c_all, c_first_half, c_second_half).
    """
    ratios = np.array(
        [np.max(np.abs(p)) / (1.0 + np.max(np.abs(x))) for p, x in zip(psis, totals)], dtype=float
    )
    half = len(ratios) // 2
    return float(ratios.max()), float(ratios[:half].max()), float(ratios[half:].max())


__all__ = [
    "DriftSpec",
    "DriftPair",
    "builtin_drift",
    "drift_on_path",
    "k_forward",
    "k_inverse_smooth",
    "k_inverse_general",
    "build_drift_pair_case_a",
    "build_drift_pair_case_b",
    "build_drift_pair",
    "case_a_psi_batch",
    "case_b_psi_batch",
    "psi_batch",
    "density_LT",
    "log_density",
]
