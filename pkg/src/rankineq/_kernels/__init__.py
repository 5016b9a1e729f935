"""Rank kernels: compiled when the extension is built, pure Python otherwise.

The compiled kernel works in checked 128-bit integers and redoes the
elimination on GMP integers when an intermediate overflows.  Inputs that do
not fit in 64 bits go straight to the Python kernel.  Both kernels choose the
same pivots, so results never depend on which backend ran.
"""

import numpy as np

from ._pykernel import bareiss_rank as py_bareiss_rank

try:
    from ._ckernel import bareiss_rank as c_bareiss_rank
except ImportError:  # extension not built
    c_bareiss_rank = None

HAVE_COMPILED = c_bareiss_rank is not None

_INT64_SAFE = 1 << 62
_backend = "auto"


def set_backend(name):
    """Select ``"auto"``, ``"python"`` or ``"compiled"``; returns the previous value."""
    global _backend
    if name not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled kernel is not available")
    prev, _backend = _backend, name
    return prev


def get_backend():
    return _backend


def _fits_int64(values):
    return all(-_INT64_SAFE < v < _INT64_SAFE for v in values)


def gauss_int_rank(re, im, nrows, ncols):
    """Rank with pivots of the Gaussian-integer matrix ``re + i*im`` (flat lists)."""
    if _backend != "python" and HAVE_COMPILED and _fits_int64(re) and _fits_int64(im):
        out = c_bareiss_rank(np.asarray(re, dtype=np.int64), np.asarray(im, dtype=np.int64),
                             nrows, ncols)
        if out is not None:
            return out
    return py_bareiss_rank(re, im, nrows, ncols)
