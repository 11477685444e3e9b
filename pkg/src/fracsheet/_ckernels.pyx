# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hypergeometric series; see ``_pykernels`` for the reference.

The two-sided operator product stays on NumPy's BLAS-backed matmul in both
backends; a hand-written loop here was several times slower.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()


def hyp2f1_series(double a, double b, double c, w, double tol, long max_terms):
    """Sum the hypergeometric series elementwise over ``w``.

    Returns ``(values, terms_used, converged)``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] wf = np.ascontiguousarray(w, dtype=np.float64).ravel()
    cdef Py_ssize_t m = wf.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] total = np.ones(m)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] nterms = np.zeros(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] conv = np.zeros(m, dtype=np.uint8)
    cdef const double[::1] wv = wf
    cdef double[::1] tv = total
    cdef cnp.int64_t[::1] nv = nterms
    cdef cnp.uint8_t[::1] cv = conv
    cdef Py_ssize_t i
    cdef long k
    cdef double term, s, ratio, x
    with nogil:
        for i in range(m):
            x = wv[i]
            term = 1.0
            s = 1.0
            for k in range(max_terms):
                ratio = (a + k) * (b + k) / ((c + k) * (k + 1.0))
                term = term * ratio * x
                s = s + term
                nv[i] = k + 1
                if ratio == 0.0:
                    cv[i] = 1
                    break
                # the tail is geometric once |ratio * w| < 1
                if fabs(ratio * x) < 1.0 and fabs(term) <= tol * fabs(s):
                    cv[i] = 1
                    break
            tv[i] = s
    shape = np.shape(w)
    return total.reshape(shape), nterms.reshape(shape), conv.astype(bool).reshape(shape)
