"""Time the numba kernels against their pure-Python/numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row reports the best-of-N wall time of the compiled kernel (after a
warm-up call) and of ``kernel.py_func``, plus the speed-up.
"""
import argparse
import time

import numpy as np

from cryptoeff import _accel, kernels
from cryptoeff.ml.svm import rbf
from cryptoeff.rng import substream


def best_of(fn, args, repeat):
    fn(*args)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    g = substream(0, "bench")
    c = 100 * np.cumprod(np.exp(g.normal(0, 0.03, 20_000)))
    h, lo = c * 1.01, c * 0.99
    X = g.standard_normal((300, 25))
    y = np.where(X[:, 0] + 0.5 * g.standard_normal(300) > 0, 1.0, -1.0)
    K = rbf(X, X, 0.05)
    z1, z2 = g.standard_normal((256, 365)), g.standard_normal((256, 365))
    heston = (100.0, 0.04, 0.0, 2.0, 0.04, 0.3, -0.7, 1 / 252, z1, z2)
    return [
        ("rsi (20k bars)", kernels.rsi_kernel, kernels.rsi_kernel.py_func, (c, 14)),
        ("adx (20k bars)", kernels.adx_kernel, kernels.adx_kernel.py_func, (h, lo, c, 14)),
        ("sar (20k bars)", kernels.sar_kernel, kernels.sar_kernel.py_func, (h, lo, True, 0.02, 0.2)),
        ("rbf matrix 300x300", kernels.rbf_kernel_matrix, kernels.rbf_kernel_matrix.py_func, (X, X, 0.05)),
        ("smo 300 points", kernels.smo_solve, kernels.smo_solve.py_func, (K, y, 10.0, 1e-5, 3_000_000)),
        ("heston 256x365 (loop vs numpy)", kernels._heston_paths_nb, kernels._heston_paths_np, heston),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.HAS_NUMBA:
        print("numba is disabled; both columns time the fallback")
    print(f"{'kernel':<32}{'numba s':>10}{'fallback s':>12}{'speed-up':>10}")
    for name, fast, slow, a in cases():
        tf = best_of(fast, a, args.repeat)
        ts = best_of(slow, a, args.repeat)
        print(f"{name:<32}{tf:>10.4f}{ts:>12.4f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
