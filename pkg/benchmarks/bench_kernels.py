"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from artifact import _kernels_py as py

try:
    from artifact import _kernels as cy
except ImportError:
    cy = None


CASES = {
    "gauss_sum c=1e-4 (20k terms)": lambda k: k.gauss_sum(1e-4, 0.3, -10_000, 10_000),
    "gauss_sum c=1e-6 (200k terms)": lambda k: k.gauss_sum(1e-6, 0.3, -100_000, 100_000),
    "comb_sum 10k points r=4": lambda k: k.comb_sum(W_SMALL, 0.7, 2.0 ** -6, 4, 8.0),
    "comb_sum 200k points r=12": lambda k: k.comb_sum(W_LARGE, 1.1, 2.0 ** -10, 12, 8.0),
}
W_SMALL = np.linspace(-2, 2, 10_000)
W_LARGE = np.linspace(-2, 2, 200_000)


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if cy is None:
        print("compiled extension not built; only the numpy path is timed")
    print(f"{'case':34s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for name, case in CASES.items():
        tp = best_of(lambda: case(py), args.repeat)
        if cy is None:
            print(f"{name:34s} {1e3 * tp:11.2f} {'-':>12s} {'-':>8s}")
            continue
        tc = best_of(lambda: case(cy), args.repeat)
        print(f"{name:34s} {1e3 * tp:11.2f} {1e3 * tc:12.2f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
