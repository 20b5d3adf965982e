"""Compare the compiled kernels with the pure-Python reference.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import sys
import timeit

import numpy as np

from steinbeta import _kernels_py

try:
    from steinbeta import _kernels
except ImportError:
    _kernels = None


def cases():
    xs = np.linspace(-0.999, 0.999, 2001)
    us = np.linspace(0.001, 0.999, 2001)
    return {
        "lgamma x4000": lambda k: [k.lgamma(v) for v in np.linspace(0.1, 50.0, 4000)],
        "betainc_array 2001 pts": lambda k: k.betainc_array(2.5, 0.5, us),
        "sym_s_interior 2001 pts": lambda k: k.sym_s_interior(-0.5, 1.0, xs),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the pure-Python path is available")
        return 1
    print(f"{'kernel':<26}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max |diff|':>14}")
    for name, fn in cases().items():
        tp = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat))
        tc = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=args.repeat))
        diff = float(np.max(np.abs(np.asarray(fn(_kernels_py), dtype=float)
                                   - np.asarray(fn(_kernels), dtype=float))))
        print(f"{name:<26}{1e3 * tp:>14.2f}{1e3 * tc:>14.2f}{tp / tc:>10.1f}{diff:>14.3g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
