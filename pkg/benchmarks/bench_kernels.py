"""Compare the numba and numpy Jacobi eigensolver backends.

Usage: python3 benchmarks/bench_kernels.py [--sizes 3 6 10] [--batch 3600] [--repeat 5]

Prints the best wall time per backend and the max eigenvalue difference
against LAPACK (numpy.linalg.eigvalsh) for each matrix size.
"""
import argparse
import time

import numpy as np

from knumrange import _kernels


def random_hermitian(rng, m, n):
    g = rng.standard_normal((m, n, n)) + 1j * rng.standard_normal((m, n, n))
    return (g + g.conj().transpose(0, 2, 1)) / 2


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[3, 6, 10])
    ap.add_argument("--batch", type=int, default=3600)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if not _kernels.HAVE_NUMBA:
        print("numba unavailable (or KNUMRANGE_DISABLE_NUMBA set): numpy only")
    _kernels.warmup()

    print(f"{'n':>4} {'backend':>8} {'seconds':>10} {'max |dw|':>10}")
    for n in args.sizes:
        stack = random_hermitian(rng, args.batch, n)
        ref = np.linalg.eigvalsh(stack)[:, ::-1]
        times = {}
        for be in backends:
            w, _ = _kernels.batch_eigh(stack, want_vectors=True, backend=be)
            err = np.abs(w - ref).max()
            times[be] = best_time(lambda: _kernels.batch_eigh(stack, backend=be), args.repeat)
            print(f"{n:>4} {be:>8} {times[be]:>10.4f} {err:>10.2e}")
        if len(times) == 2:
            print(f"{n:>4} {'speedup':>8} {times['numpy'] / times['numba']:>10.1f}x")


if __name__ == "__main__":
    main()
