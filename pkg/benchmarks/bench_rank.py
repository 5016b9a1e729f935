"""Compare the compiled and pure-Python exact rank kernels.

    python3 benchmarks/bench_rank.py --sizes 4 8 12 16 --bound 9 --repeat 50
"""

import argparse
import timeit

import numpy as np

from rankineq import bipartite as bp
from rankineq._kernels import HAVE_COMPILED, c_bareiss_rank, py_bareiss_rank


def _cases(n, bound, count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        re = rng.integers(-bound, bound + 1, size=n * n)
        im = rng.integers(-bound, bound + 1, size=n * n)
        out.append((re, im, re.tolist(), im.tolist()))
    return out


def bench(sizes, bound, repeat, seed=0):
    rows = []
    for n in sizes:
        cases = _cases(n, bound, repeat, seed)
        t_py = timeit.timeit(lambda: [py_bareiss_rank(r, i, n, n) for _, _, r, i in cases], number=1) / repeat
        t_c = None
        if HAVE_COMPILED:
            for re, im, r, i in cases:
                assert c_bareiss_rank(re, im, n, n) == py_bareiss_rank(r, i, n, n)
            t_c = timeit.timeit(lambda: [c_bareiss_rank(re, im, n, n) for re, im, _, _ in cases], number=1) / repeat
        rows.append((n, t_py, t_c))
    return rows


def bench_scan(count, seed=0):
    """Per-instance cost of the K=3 conjecture check on a (3,3,4,4) grid, per backend."""
    from rankineq import _kernels
    from rankineq.conjecture import check_conjecture

    mats = [bp.random_schmidt_rank_k(3, 3, 3, 4, 4, seed + i) for i in range(count)]
    out = {}
    for name in ("python", "compiled") if HAVE_COMPILED else ("python",):
        prev = _kernels.set_backend(name)
        try:
            out[name] = timeit.timeit(lambda: [check_conjecture(m) for m in mats], number=1) / count
        finally:
            _kernels.set_backend(prev)
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[4, 8, 12, 16, 24])
    p.add_argument("--bound", type=int, default=9)
    p.add_argument("--repeat", type=int, default=50)
    p.add_argument("--scan-count", type=int, default=200)
    args = p.parse_args(argv)

    print(f"compiled kernel available: {HAVE_COMPILED}")
    print(f"{'n':>4} {'python ms':>11} {'compiled ms':>12} {'speedup':>8}")
    for n, t_py, t_c in bench(args.sizes, args.bound, args.repeat):
        if t_c is None:
            print(f"{n:>4} {t_py * 1e3:>11.3f} {'-':>12} {'-':>8}")
        else:
            print(f"{n:>4} {t_py * 1e3:>11.3f} {t_c * 1e3:>12.3f} {t_py / t_c:>7.1f}x")
    if args.scan_count:
        per = bench_scan(args.scan_count)
        print("K=3 check on (3,3,4,4), per instance:",
              ", ".join(f"{k} {v * 1e3:.2f} ms" for k, v in per.items()))


if __name__ == "__main__":
    main()
