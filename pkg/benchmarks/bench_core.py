"""Compare the compiled and NumPy hypergeometric series kernels.

Run with ``python3 benchmarks/bench_core.py``; prints one line per case
with the median time of each backend and the largest absolute difference.
The operator product ``tri_apply`` is timed for reference only: it uses
NumPy's matmul in both backends.
"""

import argparse
import timeit

import numpy as np

from fracsheet import _pykernels
from fracsheet.fraccalc import integral_matrix
from fracsheet.simulate import cell_weight_matrix

try:
    from fracsheet import _ckernels
except ImportError:
    _ckernels = None


def _median_time(fn, repeat):
    return float(np.median(timeit.repeat(fn, number=1, repeat=repeat)))


def cases(rng):
    for a, b, c, lo, hi, size in ((0.3, 1.0, 1.7, -0.9, 0.9, 100_000), (0.2, 0.8, 1.1, 0.0, 0.5, 100_000),
                                  (0.4, 1.0, 1.4, -0.5, 0.5, 1_000)):
        w = rng.uniform(lo, hi, size)
        yield f"hyp2f1_series ({a},{b};{c}) w in [{lo},{hi}] x{size}", "hyp2f1_series", (a, b, c, w, 1e-15, 2000)


def operator_cases(rng):
    for n in (33, 129, 257):
        L = integral_matrix(0.3, n, 1.0 / (n - 1))
        R = integral_matrix(0.7, n, 1.0 / (n - 1))
        yield f"tri_apply integral n={n}", (L, rng.standard_normal((n, n)), R)
    K = cell_weight_matrix(0.3, 1.0, 33)
    yield "tri_apply volterra batch=2048 n=33", (K, rng.standard_normal((2048, 32, 32)), K)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=7)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled module not built; only the NumPy backend is available")
    rng = np.random.default_rng(0)
    print(f"{'case':52s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s} {'max diff':>10s}")
    for name, op, argv_ in cases(rng):
        py = getattr(_pykernels, op)
        tp = _median_time(lambda: py(*argv_), args.repeat)
        if _ckernels is None:
            print(f"{name:52s} {tp * 1e3:11.3f}")
            continue
        cy = getattr(_ckernels, op)
        tc = _median_time(lambda: cy(*argv_), args.repeat)
        diff = float(np.max(np.abs(py(*argv_)[0] - cy(*argv_)[0])))
        print(f"{name:52s} {tp * 1e3:11.3f} {tc * 1e3:12.3f} {tp / tc:8.2f} {diff:10.2e}")
    for name, argv_ in operator_cases(rng):
        tp = _median_time(lambda: _pykernels.tri_apply(*argv_), args.repeat)
        print(f"{name:52s} {tp * 1e3:11.3f}")


if __name__ == "__main__":
    main()
