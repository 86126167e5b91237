"""Times the compiled and pure-Python inner loops on identical inputs.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from cavitypairs import _kernels_py

try:
    from cavitypairs import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def cases(rng):
    n = 200_000
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    f = rng.standard_normal(400) + 1j * rng.standard_normal(400)
    ts = np.sort(rng.uniform(0, 10.0, 50_000))
    ti = np.sort(ts + rng.exponential(1e-3, ts.size))
    return {
        "linear_recurrence (n=2e5)": lambda m: m.linear_recurrence(x, 0.999 + 0.01j, 0.5, 0.5),
        "flux_recurrence (n=2e5)": lambda m: m.flux_recurrence(x, 1e-3, 1.0, 0.7),
        "direct_flux_sum (n=400)": lambda m: m.direct_flux_sum(f, 1e-3, 1.0, 0.7),
        "coincidence_deltas (5e4 x 5e4)": lambda m: m.coincidence_deltas(ts, ti, 5e-3),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':34s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speed-up':>9s}")
    for name, fn in cases(rng).items():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _kernels_c is None:
            print(f"{name:34s} {tp:12.2f} {'n/a':>12s} {'':>9s}")
            continue
        tc = min(timeit.repeat(lambda: fn(_kernels_c), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:34s} {tp:12.2f} {tc:12.2f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
