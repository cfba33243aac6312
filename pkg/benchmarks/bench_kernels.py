#!/usr/bin/env python3
"""Compare the numba-compiled kernels against the pure-numpy fallbacks.

The numpy path is what you get with RFICANCEL_NUMBA=0 (or without numba
installed); this script times both implementations in one process and checks
they agree bit-for-bit.

Usage: python benchmarks/bench_kernels.py [--sizes small|paper]
"""

import argparse
import time

import numpy as np

from rficancel import _kernels


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", choices=("small", "paper"), default="small")
    args = parser.parse_args()

    if args.sizes == "paper":
        cases = [(500, 64000), (500, 153600)]
    else:
        cases = [(100, 4000), (100, 38400), (200, 38400)]

    if not _kernels.NUMBA_ENABLED:
        print("numba path disabled (RFICANCEL_NUMBA=0 or numba missing); "
              "timing the numpy fallback only\n")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14} {'L':>4} {'N':>7} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for L, N in cases:
        x = rng.standard_normal(N) + 1j * rng.standard_normal(N)

        t_np, U_np = timeit(_kernels._hankel_fill_numpy, x, L)
        if _kernels.NUMBA_ENABLED:
            _kernels.hankel_fill(x, L)  # JIT warm-up
            t_nb, U_nb = timeit(_kernels.hankel_fill, x, L)
            assert np.array_equal(U_np, U_nb)
            print(f"{'hankel_fill':<14} {L:>4} {N:>7} {t_np * 1e3:>8.2f}ms "
                  f"{t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.2f}x")
        else:
            print(f"{'hankel_fill':<14} {L:>4} {N:>7} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")

        U = U_np
        t_np, d_np = timeit(_kernels._diag_average_numpy, U)
        if _kernels.NUMBA_ENABLED:
            _kernels.diag_average(U)  # JIT warm-up
            t_nb, d_nb = timeit(_kernels.diag_average, U)
            assert np.array_equal(d_np, d_nb)
            print(f"{'diag_average':<14} {L:>4} {N:>7} {t_np * 1e3:>8.2f}ms "
                  f"{t_nb * 1e3:>8.2f}ms {t_np / t_nb:>7.2f}x")
        else:
            print(f"{'diag_average':<14} {L:>4} {N:>7} {t_np * 1e3:>8.2f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
