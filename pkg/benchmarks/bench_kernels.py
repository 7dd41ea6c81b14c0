"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--dims 2 4 8 16] [--repeat 200]

Both variants are called directly, so the DEDDENS_NUMBA flag does not matter
here.  The first numba call per signature (compilation) is excluded.
"""

import argparse
import sys
import timeit

import numpy as np

from deddens import _accel


def _matrix(rng, n, radius=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return np.ascontiguousarray(a * radius / np.max(np.abs(np.linalg.eigvals(a))))


def cases(n, rng):
    a = _matrix(rng, n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    k = max(1, n // 3)
    labels = np.concatenate([np.arange(k), rng.integers(0, k, n - k)]).astype(np.int64)
    w = rng.uniform(0.5, 2.0, n)
    d = 1.0 / (1.0 / 20 + 1.0)
    return {
        "block_mean": ((f, labels, w, k), {}),
        "gelfand_radius": ((a, 1e-9, 64), {}),
        "stein_partial_sum": ((a, d, 1e-14, 400), {}),
        "normalized_powers": ((a, 40, 1e-10), {}),
    }


def bench(fn, args, repeat):
    fn(*args)  # warm-up, and JIT compilation for the numba variant
    return min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16])
    p.add_argument("--repeat", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    if not _accel.HAVE_NUMBA:
        print("numba is not importable; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<20} {'dim':>4} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for n in args.dims:
        for name, (call_args, _) in cases(n, rng).items():
            t_np = bench(getattr(_accel, f"{name}_numpy"), call_args, args.repeat)
            t_nb = bench(getattr(_accel, f"{name}_numba"), call_args, args.repeat)
            print(f"{name:<20} {n:>4} {t_np * 1e6:>10.1f} {t_nb * 1e6:>10.1f} {t_np / t_nb:>7.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
