"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--n 10000] [--m 8] [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` time for each backend
and the speedup. The compiled column is skipped if the extension is not built.
"""

import argparse
import timeit

import numpy as np

from ivfunctional import kernels
from ivfunctional.linalg import PIVOT_TOL, POWER_MAX_ITER, POWER_TOL


def cases(n, m, rng):
    z = rng.random(n)
    w = rng.random(n)
    lambdas = np.r_[1.0, 0.3 * np.arange(2, 26, dtype=float) ** -3.0]
    a = np.eye(m) + 0.1 * rng.standard_normal((m, m))
    return {
        "basis_matrix": lambda k: k.basis_matrix(z, m),
        "joint_density": lambda k: k.joint_density(z, w, lambdas),
        "galerkin_matrix": lambda k: k.galerkin_matrix(z, w, m),
        "invert": lambda k: k.invert(a, PIVOT_TOL),
        "spectral_norm": lambda k: k.spectral_norm(a, POWER_TOL, POWER_MAX_ITER, 1),
    }


def best_time(fn, repeat):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=10_000)
    ap.add_argument("--m", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    backends = {name: kernels.load_backend(name) for name in kernels.available_backends()}
    table = cases(args.n, args.m, np.random.default_rng(0))
    print(f"n={args.n} m={args.m} backends={sorted(backends)} (selected: {kernels.BACKEND})")
    print(f"{'kernel':<16}{'python (s)':>14}{'compiled (s)':>14}{'speedup':>10}")
    for name, fn in table.items():
        t = {b: best_time(lambda: fn(mod), args.repeat) for b, mod in backends.items()}
        py = t.get("python", float("nan"))
        cc = t.get("compiled", float("nan"))
        print(f"{name:<16}{py:>14.3e}{cc:>14.3e}{py / cc:>9.1f}x")


if __name__ == "__main__":
    main()
