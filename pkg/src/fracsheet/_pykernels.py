"""Pure NumPy versions of the hot kernels.

``hyp2f1_series`` mirrors ``_ckernels.pyx`` and is used when the compiled
module is unavailable or ``FRACSHEET_PURE=1`` is set. ``tri_apply`` is used
by both backends.
"""

import numpy as np


def hyp2f1_series(a, b, c, w, tol, max_terms):
    """Sum the hypergeometric series elementwise over ``w``.

    Returns ``(values, terms_used, converged)``.
    """
    w = np.ascontiguousarray(w, dtype=float)
    total = np.ones_like(w)
    term = np.ones_like(w)
    nterms = np.zeros(w.shape, dtype=np.int64)
    active = np.ones(w.shape, dtype=bool)
    k = 0
    while k < max_terms and active.any():
        ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0))
        term[active] *= ratio * w[active]
        total[active] += term[active]
        k += 1
        nterms[active] = k
        # the tail is geometric once |ratio * w| < 1
        done = (np.abs(term) <= tol * np.abs(total)) & (np.abs(ratio * w) < 1.0)
        active &= ~done
        if ratio == 0.0:
            active[:] = False
    converged = ~active
    return total, nterms, converged


def tri_apply(left, field, right):
    """Two-sided product ``left @ field @ right.T`` over the last two axes."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    field = np.asarray(field, dtype=float)
    return np.matmul(np.matmul(left, field), right.T)
