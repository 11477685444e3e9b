"""Selects the compiled kernel module when present, else the NumPy fallback."""

import os

from fracsheet import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FRACSHEET_PURE", "") not in ("1", "true", "yes"):
    try:
        from fracsheet import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pykernels

hyp2f1_series = _impl.hyp2f1_series
# BLAS-backed in both backends (see benchmarks/bench_core.py)
tri_apply = _pykernels.tri_apply
