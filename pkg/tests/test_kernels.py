import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankineq import _kernels
from rankineq import matrix as mx
from rankineq._kernels import HAVE_COMPILED, c_bareiss_rank, gauss_int_rank, py_bareiss_rank

needs_compiled = pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")


@st.composite
def flat_int_matrices(draw, max_dim=7, bound=9):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    k = draw(st.integers(0, min(r, c)))
    ints = st.integers(-bound, bound)
    # force rank <= k with probability 1/2 by repeating rows
    re = draw(st.lists(ints, min_size=r * c, max_size=r * c))
    im = draw(st.lists(ints, min_size=r * c, max_size=r * c))
    if k and draw(st.booleans()):
        for i in range(k, r):
            src = (i % k) * c
            re[i * c:(i + 1) * c] = re[src:src + c]
            im[i * c:(i + 1) * c] = im[src:src + c]
    return re, im, r, c


def _numpy_rank(re, im, r, c):
    a = np.array(re, dtype=float).reshape(r, c) + 1j * np.array(im, dtype=float).reshape(r, c)
    return int(np.linalg.matrix_rank(a))


@given(flat_int_matrices())
def test_python_kernel_matches_numpy_on_small_entries(case):
    assert py_bareiss_rank(*case)[0] == _numpy_rank(*case)


@needs_compiled
@given(flat_int_matrices())
def test_backends_agree(case):
    re, im, r, c = case
    got = c_bareiss_rank(np.array(re, dtype=np.int64), np.array(im, dtype=np.int64), r, c)
    assert got == py_bareiss_rank(re, im, r, c)


@needs_compiled
@given(flat_int_matrices(max_dim=12, bound=10**6))
def test_backends_agree_on_large_entries(case):
    # 128-bit intermediates overflow here, exercising the GMP path
    re, im, r, c = case
    got = c_bareiss_rank(np.array(re, dtype=np.int64), np.array(im, dtype=np.int64), r, c)
    assert got == py_bareiss_rank(re, im, r, c)


@needs_compiled
def test_overflow_is_reported_without_bignum():
    rng = np.random.default_rng(3)
    re = rng.integers(-10**9, 10**9, size=144)
    im = rng.integers(-10**9, 10**9, size=144)
    assert c_bareiss_rank(re, im, 12, 12, allow_bignum=False) is None
    assert c_bareiss_rank(re, im, 12, 12)[0] == 12


def test_pivot_tie_break_prefers_lowest_index():
    rank, prow, pcol = py_bareiss_rank([1, 1, 1, 1], [0, 0, 0, 0], 2, 2)
    assert (rank, prow, pcol) == (1, [0], [0])
    # largest norm wins regardless of position
    rank, prow, pcol = py_bareiss_rank([1, 0, 0, 5], [0, 0, 0, 0], 2, 2)
    assert (prow[0], pcol[0]) == (1, 1)


def test_huge_entries_use_python_kernel():
    big = 1 << 70
    assert gauss_int_rank([big, 1, 2 * big, 2], [0, 0, 0, 0], 2, 2)[0] == 1


def test_backend_switch():
    m = mx.random_matrix(6, 6, 1, 5)
    prev = _kernels.set_backend("python")
    try:
        slow = mx.rank(m)
    finally:
        _kernels.set_backend(prev)
    assert mx.rank(m) == slow
    with pytest.raises(ValueError):
        _kernels.set_backend("fortran")


def test_fallback_when_extension_missing():
    # hide the compiled module and confirm the package still imports and ranks
    code = (
        "import sys, importlib.abc\n"
        "class Block(importlib.abc.MetaPathFinder):\n"
        "    def find_spec(self, name, path=None, target=None):\n"
        "        if name.endswith('_ckernel'):\n"
        "            raise ImportError(name)\n"
        "sys.meta_path.insert(0, Block())\n"
        "from rankineq import _kernels, matrix as mx\n"
        "assert not _kernels.HAVE_COMPILED\n"
        "print(mx.rank(mx.Matrix.exact([[1, 2], [2, 4]])).rank)\n"
    )
    proc = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "1"


def test_benchmark_runs():
    script = Path(__file__).resolve().parent.parent / "benchmarks" / "bench_rank.py"
    proc = subprocess.run([sys.executable, str(script), "--sizes", "3", "5", "--repeat", "2", "--scan-count", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "python ms" in proc.stdout
