"""Time the jitted kernels against their pure-numpy twins.

Run from the repository root:

    python benchmarks/bench_kernels.py

The jitted path needs numba; with MPXMBO_DISABLE_JIT=1 (or numba missing)
both columns measure the numpy implementations and the ratio is ~1.
"""

import argparse
import time

import numpy as np

from mpxmbo import _kernels
from mpxmbo.network import SparseSym


def bench(fn, args, repeats, number):
    fn(*args)  # warm up (triggers jit compilation on first call)
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(number):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def random_csr(rng, n, nnz_per_row):
    half = n * nnz_per_row // 2
    r = rng.integers(0, n, size=half)
    c = rng.integers(0, n, size=half)
    w = rng.uniform(0.1, 2.0, size=half)
    return SparseSym.from_coo(
        n, np.concatenate([r, c]), np.concatenate([c, r]), np.concatenate([w, w])
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=20_000, help="matrix dimension")
    parser.add_argument("--nnz", type=int, default=12, help="stored entries per row")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    mat = random_csr(rng, args.n, args.nnz)
    x = rng.standard_normal(args.n)
    labels = rng.integers(1, 5, size=args.n)
    S = rng.standard_normal((11, 11))
    S = S + S.T

    rows = [
        (
            "csr_matvec",
            _kernels.csr_matvec,
            _kernels.csr_matvec_numpy,
            (mat.indptr, mat.rows, mat.cols, mat.data, x, mat.n),
            200,
        ),
        (
            "label_edge_sums",
            _kernels.label_edge_sums,
            _kernels.label_edge_sums_numpy,
            (mat.rows, mat.cols, mat.data, labels),
            200,
        ),
        (
            "enumerate_partitions",
            _kernels.enumerate_partitions,
            _kernels.enumerate_partitions_numpy,
            (S, 3),
            3,
        ),
    ]

    print(f"numba active: {_kernels.USING_NUMBA}")
    print(f"{'kernel':<22}{'jit (ms)':>12}{'numpy (ms)':>12}{'speedup':>10}")
    for name, jit_fn, np_fn, call_args, number in rows:
        t_jit = bench(jit_fn, call_args, args.repeats, number)
        t_np = bench(np_fn, call_args, args.repeats, number)
        print(f"{name:<22}{t_jit * 1e3:>12.3f}{t_np * 1e3:>12.3f}{t_np / t_jit:>10.2f}x")


if __name__ == "__main__":
    main()
