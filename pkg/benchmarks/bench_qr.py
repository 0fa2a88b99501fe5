"""Time the compiled simplex kernel against its pure numpy twin.

Run from the repository root:

    python3 benchmarks/bench_qr.py
    python3 benchmarks/bench_qr.py --repeats 9 --tau 0.25

Both kernels share pivoting rules, so each cell also cross-checks that
the two solutions agree before reporting times.
"""

import argparse
import time

import numpy as np

from panelmix._rng import substream
from panelmix.quantile import _simplex_py
from panelmix.quantile.solver import _initial_basis

try:
    from panelmix.quantile import _simplex
except ImportError:
    _simplex = None


def _instance(n: int, p: int, seed: int):
    rng = substream(seed, n, p)
    X = np.column_stack([np.ones(n)] + [rng.standard_normal(n) for _ in range(p - 1)])
    beta = rng.standard_normal(p)
    y = X @ beta + rng.standard_t(df=5, size=n)
    return X, y


def _time_kernel(kernel, X, y, tau: float, repeats: int):
    basis0 = _initial_basis(X)
    zero_tol = 1e-10 * (1.0 + float(np.max(np.abs(y))))
    max_iter = 50 * X.shape[0]
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = kernel.solve(X, y, tau, basis0, max_iter, zero_tol, 1e-11)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,400,1600,4000",
                        help="comma-separated row counts")
    parser.add_argument("--cols", default="2,5,10",
                        help="comma-separated column counts")
    parser.add_argument("--tau", type=float, default=0.5)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timings per cell; best is reported")
    parser.add_argument("--seed", type=int, default=20240818)
    args = parser.parse_args()

    if _simplex is None:
        print("compiled kernel not built; timing the pure kernel alone")
    sizes = [int(s) for s in args.sizes.split(",")]
    cols = [int(s) for s in args.cols.split(",")]

    header = f"{'n':>6} {'p':>4} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        for p in cols:
            X, y = _instance(n, p, args.seed)
            t_pure, r_pure = _time_kernel(_simplex_py, X, y, args.tau, args.repeats)
            if _simplex is None:
                print(f"{n:>6} {p:>4} {1e3 * t_pure:>12.3f} {'-':>14} {'-':>9}")
                continue
            t_fast, r_fast = _time_kernel(_simplex, X, y, args.tau, args.repeats)
            if not np.allclose(r_pure[0], r_fast[0], atol=1e-10):
                raise AssertionError(f"kernels disagree at n={n}, p={p}")
            print(
                f"{n:>6} {p:>4} {1e3 * t_pure:>12.3f} {1e3 * t_fast:>14.3f} "
                f"{t_pure / t_fast:>8.1f}x"
            )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
