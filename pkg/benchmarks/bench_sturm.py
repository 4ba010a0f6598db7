"""Compiled vs pure-Python Sturm counting on the half-line Coulomb operator.

    python3 benchmarks/bench_sturm.py [--n 200000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from paralayer import kernels, spec1d


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--shifts", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    grid = spec1d.Grid1D(2000.0, args.n)
    op = spec1d.discretize(lambda s: -1.0 / s, grid)
    xs = np.ascontiguousarray(-np.logspace(-1, -4, args.shifts))
    off2 = op.off2

    py = kernels.python_backend()
    t_py, c_py = best_of(lambda: py.sturm_count_many(op.diag, off2, xs), args.repeat)
    print(f"n = {args.n}, {args.shifts} shifts")
    print(f"  python  : {t_py:8.4f} s   counts {c_py.tolist()}")
    ext = kernels.compiled_backend()
    if ext is None:
        print("  cython  : not built")
        return
    t_c, c_c = best_of(lambda: ext.sturm_count_many(op.diag, off2, xs), args.repeat)
    print(f"  cython  : {t_c:8.4f} s   counts {c_c.tolist()}")
    print(f"  speed-up: {t_py / t_c:8.1f}x   agree: {bool(np.array_equal(c_py, c_c))}")


if __name__ == "__main__":
    main()
