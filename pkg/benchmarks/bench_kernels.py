"""Compare the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints best-of-``repeat`` wall time per kernel and back end, the speed-up,
and the largest difference between the two results.
"""
import argparse
import time

import numpy as np

from spherelab import _kernels_py

try:
    from spherelab import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def _cases(rng):
    n = 256
    vals = rng.random((n, n))
    lo = np.array([-1.0, -1.0])
    inv_h = np.full(2, n / 2.0)
    pts = rng.uniform(-1.1, 1.1, size=(200_000, 2))
    th = 2 * np.pi * np.arange(256) / 256
    offs = 0.5 * np.column_stack([np.cos(th), np.sin(th)])
    w = np.full(256, 1 / 256)
    centers = rng.uniform(-0.5, 0.5, size=(4096, 2))
    cloud = rng.random((20_000, 1))
    return {
        "interp": lambda k: k.interp(vals, lo, inv_h, pts),
        "translate_sum": lambda k: k.translate_sum(vals, lo, inv_h, centers, offs, w),
        "translate_sum_pair": lambda k: k.translate_sum_pair(
            vals, lo, inv_h, vals, lo, inv_h, centers, offs, offs[::-1].copy(), w),
        "greedy_net": lambda k: k.greedy_net(cloud, 1e-3),
    }


def _best(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'python s':>12}{'compiled s':>12}{'speed-up':>10}{'max diff':>12}")
    for name, fn in _cases(rng).items():
        tp, op = _best(lambda: fn(_kernels_py), args.repeat)
        if _compiled is None:
            print(f"{name:<20}{tp:>12.4f}{'n/a':>12}")
            continue
        tc, oc = _best(lambda: fn(_compiled), args.repeat)
        diff = float(np.max(np.abs(np.asarray(op, float) - np.asarray(oc, float))))
        print(f"{name:<20}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
