"""Benchmark: compiled threshold+pool kernel vs the numpy fallback.

Run:  python benchmarks/bench_kernels.py [--repeats 5]
"""

import argparse
import time

import numpy as np

from dinoiser import kernels
from dinoiser.denoiser import cosine_gram


def bench(impl, affinity, gamma, features, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        impl(affinity, gamma, features)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--gamma", type=float, default=0.2)
    parser.add_argument("--dim", type=int, default=512)
    args = parser.parse_args()

    impls = kernels.available_impls()
    print(f"implementations: {', '.join(impls)}   (selected at import: {kernels.IMPL})")
    print(f"{'N (patches)':>12} {'d':>5}" + "".join(f" {name:>12}" for name in impls) + "  speedup")

    rng = np.random.default_rng(0)
    for side in (14, 28, 56, 64):
        n = side * side
        features = rng.normal(size=(n, args.dim))
        affinity = cosine_gram(features)
        times = {name: bench(impl, affinity, args.gamma, features, args.repeats)
                 for name, impl in impls.items()}
        ratio = times["numpy"] / times.get("cython", times["numpy"])
        row = f"{n:>12} {args.dim:>5}"
        row += "".join(f" {times[name] * 1000:>10.2f}ms" for name in impls)
        row += f"  {ratio:>6.2f}x"
        print(row)


if __name__ == "__main__":
    main()
