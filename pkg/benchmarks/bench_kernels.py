"""Compare the compiled superoperator kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--dims 2 4 8 16] [--ops 3] [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from lindstruct import kernels
from lindstruct.randgen import random_complex, random_hermitian


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--dims", type=int, nargs="+", default=[2, 4, 8, 16])
    ap.add_argument("--ops", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    try:
        from lindstruct import _kernels
    except ImportError:
        _kernels = None
        print("compiled extension not built; timing the numpy fallback only")

    rng = np.random.default_rng(7)
    print(f"{'d':>4} {'kernel':>10} {'numpy ms':>10} {'cython ms':>10} {'speedup':>8} {'max diff':>10}")
    for d in args.dims:
        H = np.ascontiguousarray(random_hermitian(rng, d))
        ops = np.ascontiguousarray(np.stack([random_complex(rng, d) for _ in range(args.ops)]))
        a, b = ops[0].copy(), ops[1 % len(ops)].copy()
        cases = [("lindblad", kernels.lindblad_matrix_py, "lindblad_matrix", (H, ops)),
                 ("sandwich", kernels.sandwich_matrix_py, "sandwich_matrix", (a, b))]
        for label, py, cname, call_args in cases:
            t_py = min(timeit.repeat(lambda: py(*call_args), number=1, repeat=args.repeat)) * 1e3
            if _kernels is None:
                print(f"{d:>4} {label:>10} {t_py:>10.4f} {'-':>10} {'-':>8} {'-':>10}")
                continue
            fn = getattr(_kernels, cname)
            t_cy = min(timeit.repeat(lambda: fn(*call_args), number=1, repeat=args.repeat)) * 1e3
            diff = float(np.max(np.abs(fn(*call_args) - py(*call_args))))
            print(f"{d:>4} {label:>10} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>8.2f} {diff:>10.2e}")


if __name__ == "__main__":
    main()
