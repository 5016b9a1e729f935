# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled fraction-free rank kernel.

Tries checked 128-bit arithmetic first and reruns on GMP integers when an
intermediate overflows.
"""

from libc.stdint cimport int64_t
from libc.stdlib cimport malloc, free

cdef extern from "_bareiss.h":
    int gauss_bareiss_rank(const int64_t *re, const int64_t *im, int nr, int nc,
                           int *prow, int *pcol) nogil
    int gauss_bareiss_rank_mpz(const int64_t *re, const int64_t *im, int nr, int nc,
                               int *prow, int *pcol) nogil
    int BAREISS_OVERFLOW
    int BAREISS_INEXACT


def bareiss_rank(const int64_t[::1] re, const int64_t[::1] im, int nrows, int ncols,
                 bint allow_bignum=True):
    """Same contract as the pure-Python kernel.

    Returns None only when ``allow_bignum`` is false and 128 bits overflow.
    """
    if re.shape[0] != nrows * ncols or im.shape[0] != nrows * ncols:
        raise ValueError("buffer size does not match shape")
    cdef int n = nrows if nrows < ncols else ncols
    cdef int *prow = <int *>malloc((n + 1) * sizeof(int))
    cdef int *pcol = <int *>malloc((n + 1) * sizeof(int))
    cdef int rc
    if prow == NULL or pcol == NULL:
        free(prow)
        free(pcol)
        raise MemoryError()
    try:
        with nogil:
            rc = gauss_bareiss_rank(&re[0], &im[0], nrows, ncols, prow, pcol)
        if rc == BAREISS_OVERFLOW:
            if not allow_bignum:
                return None
            with nogil:
                rc = gauss_bareiss_rank_mpz(&re[0], &im[0], nrows, ncols, prow, pcol)
        if rc == BAREISS_INEXACT:
            raise ArithmeticError("inexact Bareiss division")
        if rc < 0:
            raise MemoryError()
        return rc, [prow[t] for t in range(rc)], [pcol[t] for t in range(rc)]
    finally:
        free(prow)
        free(pcol)
