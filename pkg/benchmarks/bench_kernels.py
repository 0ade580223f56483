"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 500,1000,2000]

Prints one row per (kernel, size) with the best wall time of each backend,
and checks that both backends return identical results.
"""
import argparse
import timeit

import numpy as np

from hubridge import kernels


def _cases(n, dim, k):
    rng = np.random.default_rng(n)
    q = rng.standard_normal((n, dim))
    t = rng.standard_normal((n, dim))
    dist = kernels.pairwise_euclidean(q, t)
    return {
        "pairwise_euclidean": lambda: kernels.pairwise_euclidean(q, t),
        "smallest_k": lambda: kernels.smallest_k(dist, k),
        "k_smallest_mean": lambda: kernels.k_smallest_mean(dist, k),
        "topk_counts": lambda: kernels.topk_counts(dist, k),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="500,1000,2000")
    parser.add_argument("--dim", type=int, default=100)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    if "cython" not in kernels.BACKENDS:
        print("compiled kernels not built; only the numpy backend is available")
    print(f"{'kernel':<20}{'n':>6}" + "".join(f"{b + ' (ms)':>16}" for b in kernels.BACKENDS) + f"{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        cases = _cases(n, args.dim, args.k)
        for name, fn in cases.items():
            times, results = [], []
            for b in kernels.BACKENDS:
                with kernels.backend(b):
                    results.append(fn())
                    times.append(min(timeit.repeat(fn, number=1, repeat=args.repeat)) * 1e3)
            for r in results[1:]:
                np.testing.assert_allclose(r, results[0], rtol=1e-12, atol=1e-12)
            speedup = times[-1] / times[0] if len(times) > 1 else 1.0
            print(f"{name:<20}{n:>6}" + "".join(f"{t:>16.2f}" for t in times) + f"{speedup:>9.1f}x")


if __name__ == "__main__":
    main()
