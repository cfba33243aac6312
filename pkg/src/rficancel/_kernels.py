"""Hot inner-loop kernels with numba-accelerated and pure-numpy variants.

The numba path is used when numba imports cleanly and the environment
variable ``RFICANCEL_NUMBA`` is not set to ``0``/``off``/``false``.  Both
variants are bit-identical for the same inputs; ``benchmarks/bench_kernels.py``
compares their throughput.
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("RFICANCEL_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "off", "false", "no")

try:
    if _WANT_NUMBA:
        from numba import njit, prange
    else:  # pragma: no cover - exercised via env flag in the benchmark
        raise ImportError
    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover
    NUMBA_ENABLED = False


def _hankel_fill_numpy(x: np.ndarray, L: int) -> np.ndarray:
    K = x.shape[0] - L + 1
    idx = np.arange(L)[:, None] + np.arange(K)[None, :]
    return np.ascontiguousarray(x[idx])


def _diag_average_numpy(U: np.ndarray) -> np.ndarray:
    L, K = U.shape
    N = L + K - 1
    out = np.zeros(N, dtype=U.dtype)
    for i in range(L):
        out[i : i + K] += U[i]
    counts = np.minimum(np.minimum(np.arange(1, N + 1), L), N - np.arange(N))
    return out / counts


if NUMBA_ENABLED:

    @njit(cache=True, parallel=True)
    def _hankel_fill_numba(x, L):  # pragma: no cover - compiled
        K = x.shape[0] - L + 1
        out = np.empty((L, K), dtype=x.dtype)
        for i in prange(L):
            out[i, :] = x[i : i + K]
        return out

    @njit(cache=True, parallel=True)
    def _diag_average_numba(U):  # pragma: no cover - compiled
        L, K = U.shape
        N = L + K - 1
        out = np.empty(N, dtype=U.dtype)
        for n in prange(N):
            lo = 0 if n < K else n - K + 1
            hi = n if n < L else L - 1
            acc = U[lo, n - lo]
            for i in range(lo + 1, hi + 1):
                acc += U[i, n - i]
            out[n] = acc / (hi - lo + 1)
        return out

    def hankel_fill(x: np.ndarray, L: int) -> np.ndarray:
        return _hankel_fill_numba(np.ascontiguousarray(x), L)

    def diag_average(U: np.ndarray) -> np.ndarray:
        return _diag_average_numba(np.ascontiguousarray(U))

else:
    hankel_fill = _hankel_fill_numpy
    diag_average = _diag_average_numpy
