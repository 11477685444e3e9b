"""Graded Gauss-Legendre rules for integrands with endpoint power singularities."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=64)
def _legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _panel_rule(edges: np.ndarray, order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = _legendre(order)
    lo = edges[:-1, None]
    hi = edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x[None, :] + 1.0)
    weights = half * w[None, :]
    return nodes.ravel(), weights.ravel()


def graded_edges(lo: float, hi: float, levels: int, ratio: float, left: bool, right: bool) -> np.ndarray:
    """Panel breakpoints on [lo, hi], geometrically refined toward the flagged ends."""
    length = hi - lo
    if left and right:
        mid = lo + 0.5 * length
        a = graded_edges(lo, mid, levels, ratio, True, False)
        b = graded_edges(mid, hi, levels, ratio, False, True)
        return np.concatenate([a, b[1:]])
    powers = ratio ** np.arange(levels, 0, -1)
    if left:
        inner = lo + length * powers
        return np.concatenate([[lo], inner, [hi]])
    if right:
        inner = hi - length * powers[::-1]
        return np.concatenate([[lo], inner, [hi]])
    return np.array([lo, hi])


def graded_rule(
    lo: float,
    hi: float,
    *,
    left: bool = True,
    right: bool = True,
    levels: int = 60,
    ratio: float = 0.1,
    order: int = 12,
) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule graded toward singular endpoints.

    With ``levels`` geometric panels of ratio ``ratio`` the untreated
    innermost panel has width ``ratio**levels`` times the interval, which
    bounds the error for an integrable ``x**p`` singularity by roughly
    ``ratio**(levels*(1+p))``.
    """
    edges = graded_edges(lo, hi, levels, ratio, left, right)
    return _panel_rule(edges, order)


def composite_rule(edges: np.ndarray, order: int = 8) -> tuple[np.ndarray, np.ndarray]:
    return _panel_rule(np.asarray(edges, dtype=float), order)
