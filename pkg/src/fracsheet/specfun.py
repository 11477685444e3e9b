"""Gamma function, Gauss hypergeometric 2F1 on the negative half-line and
Wendel's Gamma-ratio bound.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from fracsheet import _core
from fracsheet.errors import DomainError, NonConvergenceError

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_P = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)

SERIES_TOL = 1e-14
SERIES_MAX_TERMS = 1_000_000
# Above this value of the Pfaff-mapped argument the 1 - w connection formula is used.
PFAFF_SWITCH = 0.9


def _lanczos_sum(x: float) -> float:
    acc = _LANCZOS_P[0]
    for k in range(1, 9):
        acc += _LANCZOS_P[k] / (x + k - 1.0)
    return acc


def _gamma_pos(x: float) -> float:
    # x >= 0.5
    t = x + _LANCZOS_G - 0.5
    # split the power so that t**(x-0.5) cannot overflow before the exp damps it
    half = t ** ((x - 0.5) / 2.0)
    return _SQRT_2PI * half * (half * math.exp(-t)) * _lanczos_sum(x)


def _gamma_real(x: float) -> float:
    """Gamma on the whole real line; raises at the poles."""
    if x < 0.5:
        if x == math.floor(x):
            raise DomainError(f"Gamma has a pole at {x}")
        return math.pi / (math.sin(math.pi * x) * _gamma_real(1.0 - x))
    return _gamma_pos(x)


def rgamma(x: float) -> float:
    """Reciprocal Gamma, zero at the non-positive integers."""
    if x <= 0 and x == math.floor(x):
        return 0.0
    return 1.0 / _gamma_real(x)


def gamma(x):
    """Euler Gamma function for positive arguments.

    Accepts a scalar or an array. Relative error is below 1e-12 on
    [1e-3, 170].
    """
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("gamma requires x > 0")
    if arr.ndim == 0:
        return _gamma_real(float(arr))
    return np.array([_gamma_real(v) for v in arr.ravel()]).reshape(arr.shape)


def lgamma(x):
    """log Gamma for positive arguments (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise DomainError("lgamma requires x > 0")

    def one(v: float) -> float:
        if v < 0.5:
            # Gamma(v) = Gamma(v + 1) / v keeps us on the positive branch
            return one(v + 1.0) - math.log(v)
        t = v + _LANCZOS_G - 0.5
        return 0.5 * math.log(2.0 * math.pi) + (v - 0.5) * math.log(t) - t + math.log(_lanczos_sum(v))

    if arr.ndim == 0:
        return one(float(arr))
    return np.array([one(v) for v in arr.ravel()]).reshape(arr.shape)


def gamma_ratio(x, s):
    """Gamma(x) / Gamma(x + s) computed in the log domain."""
    return np.exp(lgamma(x) - lgamma(np.asarray(x, dtype=float) + s))


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _series(a: float, b: float, c: float, w: np.ndarray) -> np.ndarray:
    vals, _, ok = _core.hyp2f1_series(a, b, c, w, SERIES_TOL, SERIES_MAX_TERMS)
    if not np.all(ok):
        bad = w[~ok]
        raise NonConvergenceError(
            f"2F1 series for ({a}, {b}; {c}) did not reach tolerance {SERIES_TOL} "
            f"within {SERIES_MAX_TERMS} terms at w = {bad[:3]}"
        )
    return vals


def _near_one(a: float, b: float, c: float, w: np.ndarray, one_m: np.ndarray) -> np.ndarray:
    """F(a, b; c; w) for w close to 1 via the connection formula in 1 - w.

    ``one_m`` is ``1 - w`` computed without cancellation by the caller.
    """
    d = c - a - b
    if abs(d - round(d)) < 1e-9:
        # logarithmic case; the plain series is slow but still convergent for w < 1
        return _series(a, b, c, w)
    g_c = _gamma_real(c)
    coef1 = g_c * _gamma_real(d) * rgamma(c - a) * rgamma(c - b)
    coef2 = g_c * _gamma_real(-d) * rgamma(a) * rgamma(b)
    out = np.zeros_like(w)
    if coef1 != 0.0:
        out += coef1 * _series(a, b, a + b - c + 1.0, one_m)
    if coef2 != 0.0:
        out += coef2 * one_m**d * _series(c - a, c - b, d + 1.0, one_m)
    return out


def gauss_2f1(a: float, b: float, c: float, z):
    """Gauss hypergeometric function F(a, b; c; z) for real z <= 0.

    The argument is first moved into [0, 1) with the Pfaff transformation
    ``F(a, b; c; z) = (1 - z)^(-a) F(a, c - b; c; z / (z - 1))``; the series
    is summed there, switching to the connection formula in ``1 - w`` once
    ``w > 0.9``.
    """
    if not c > 0:
        raise DomainError("gauss_2f1 requires c > 0")
    zarr = np.asarray(z, dtype=float)
    if np.any(zarr > 0) or np.any(np.isnan(zarr)):
        raise DomainError("gauss_2f1 is only implemented for z <= 0")
    scalar = zarr.ndim == 0
    zf = np.atleast_1d(zarr).ravel()

    out = np.ones_like(zf)
    if a == 0.0 or b == 0.0:
        return float(out[0]) if scalar else out.reshape(zarr.shape)

    w = zf / (zf - 1.0)
    w[zf == 0.0] = 0.0
    bb = c - b
    pre = (1.0 - zf) ** (-a)
    res = np.empty_like(zf)
    terminating = _is_nonpos_int(a) or _is_nonpos_int(bb)
    lo = (w <= PFAFF_SWITCH) | terminating
    if np.any(lo):
        res[lo] = _series(a, bb, c, w[lo])
    if np.any(~lo):
        # 1 - w = 1 / (1 - z) exactly, instead of the cancelling difference
        res[~lo] = _near_one(a, bb, c, w[~lo], 1.0 / (1.0 - zf[~lo]))
    out = pre * res
    return float(out[0]) if scalar else out.reshape(zarr.shape)


@dataclass(frozen=True)
class GammaRatio:
    """Gamma(x)/Gamma(x+s) together with Wendel's upper bound."""

    x: float
    s: float
    value: float
    upper: float

    @property
    def holds(self) -> bool:
        return self.value <= self.upper


def wendel_bound(x: float, s: float) -> GammaRatio:
    if not x >= 1:
        raise DomainError("wendel_bound requires x >= 1")
    if not 0 < s < 1:
        raise DomainError("wendel_bound requires 0 < s < 1")
    value = float(gamma_ratio(x, s))
    upper = x ** (-s) * (1.0 + s) ** (1.0 - s)
    return GammaRatio(x=x, s=s, value=value, upper=upper)
