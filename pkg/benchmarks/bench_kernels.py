"""Compare the compiled and NumPy split-scan kernels.

Usage: python benchmarks/bench_kernels.py [--n 200] [--reps 5000] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from stepshift.kernels import available_backends
from stepshift.stats import VARIANCE_FLOOR


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=200, help="segment length")
    parser.add_argument("--reps", type=int, default=5000, help="rows in the block benchmark")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    g = np.random.default_rng(0)
    x = g.standard_normal(args.n)
    block = g.standard_normal((args.reps, args.n))
    backends = available_backends()
    ref = backends["python"].lrt_profiles(block[:50], VARIANCE_FLOOR)

    print(f"n={args.n} reps={args.reps}")
    print(f"{'backend':<8} {'single (us)':>12} {'block (s)':>10} {'max rel diff':>13}")
    results = {}
    for name, mod in backends.items():
        number = 200 if name == "cython" else 20
        single = min(timeit.repeat(lambda: mod.lrt_profile(x, VARIANCE_FLOOR), number=number, repeat=args.repeat))
        block_t = min(timeit.repeat(lambda: mod.lrt_profiles(block, VARIANCE_FLOOR), number=1, repeat=args.repeat))
        diff = np.max(np.abs(mod.lrt_profiles(block[:50], VARIANCE_FLOOR) - ref) / np.maximum(ref, 1e-300))
        results[name] = (single / number, block_t)
        print(f"{name:<8} {single / number * 1e6:>12.1f} {block_t:>10.3f} {diff:>13.2e}")
    if "cython" in results:
        s = results["python"][0] / results["cython"][0]
        b = results["python"][1] / results["cython"][1]
        print(f"speedup: single x{s:.0f}, block x{b:.1f}")


if __name__ == "__main__":
    main()
