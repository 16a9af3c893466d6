"""Time the numba batch kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --reps 100000 --k 1 5 25 64
"""

import argparse
import time

import numpy as np

from properdiv import _kernels
from properdiv._accel import HAVE_NUMBA, configure_threads
from properdiv.measures import PiecewiseLinearCdf

CASES = {
    "IQ": lambda F, S: _kernels.cdf_batch(F, S, _kernels.KIND_IQ, use_jit=JIT),
    "AV": lambda F, S: _kernels.cdf_batch(F, S, _kernels.KIND_AV, use_jit=JIT),
    "KS": lambda F, S: _kernels.cdf_batch(F, S, _kernels.KIND_KS, use_jit=JIT),
    "W2": lambda F, S: _kernels.wasserstein_batch(F, S, 2.0, use_jit=JIT),
    "W1.5": lambda F, S: _kernels.wasserstein_batch(F, S, 1.5, use_jit=JIT),
}
JIT = True


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    global JIT
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=100_000)
    ap.add_argument("--k", type=int, nargs="+", default=[1, 5, 25, 64])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    configure_threads()
    rng = np.random.default_rng(0)
    F = PiecewiseLinearCdf.from_atoms(np.linspace(0.05, 0.95, 12))

    print(f"{'kernel':<6} {'k':>4} {'numba s':>9} {'numpy s':>9} {'speedup':>8} {'max |diff|':>11}")
    for k in args.k:
        S = np.sort(rng.random((args.reps, k)), axis=1)
        for name, fn in CASES.items():
            JIT = True
            fn(F, S[:10])  # compile outside the timing
            t_jit, a = best_of(lambda: fn(F, S), args.repeat)
            JIT = False
            t_np, b = best_of(lambda: fn(F, S), args.repeat)
            diff = float(np.max(np.abs(a - b)))
            print(f"{name:<6} {k:>4} {t_jit:>9.4f} {t_np:>9.4f} {t_np / t_jit:>8.1f} {diff:>11.2e}")


if __name__ == "__main__":
    main()
