"""Time the compiled kernels against the numpy fallback.

Run ``python3 benchmarks/bench_kernels.py``; prints one line per kernel with
the best of several repeats for each backend and the speed-up.  Outputs of the
two backends are checked for agreement before timing.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from kotztail import _kernels_py

try:
    from kotztail import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def _cases(n: int, rng: np.random.Generator):
    d = 6
    a = rng.standard_normal((d, d + 2))
    cov = a @ a.T
    chol = np.linalg.cholesky(cov / np.sqrt(np.outer(np.diag(cov), np.diag(cov))))
    upper = rng.uniform(-0.5, 1.5, d)
    w = rng.random((n // 10, d - 1))
    x = np.ascontiguousarray(rng.standard_normal((n, 2)))
    thr = np.array([1.0, 1.5])
    return {
        "sov_integrand": (chol, upper, w),
        "count_exceed": (x, thr),
        "exceed_mask": (x, thr),
        "block_max": (x, 1000),
    }


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000, help="rows for the sample kernels")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return
    cases = _cases(args.n, np.random.default_rng(0))
    print(f"{'kernel':<15}{'python ms':>12}{'cython ms':>12}{'speed-up':>10}")
    for name, call_args in cases.items():
        py, cy = getattr(_kernels_py, name), getattr(_ckernels, name)
        np.testing.assert_allclose(np.asarray(cy(*call_args), dtype=float),
                                   np.asarray(py(*call_args), dtype=float), rtol=1e-12)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: cy(*call_args), number=1, repeat=args.repeat))
        print(f"{name:<15}{1e3 * t_py:>12.2f}{1e3 * t_cy:>12.2f}{t_py / t_cy:>9.1f}x")


if __name__ == "__main__":
    main()
