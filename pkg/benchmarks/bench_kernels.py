"""Timing of the compiled kernels against their NumPy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat 200]

Prints one line per (kernel, size) with the per-call time of each backend
and the speedup. Both backends are imported directly, so the
``FOMKIT_PURE_PYTHON`` switch does not matter here.
"""

import argparse
import timeit

import numpy as np

from fomkit._kernels import _pykernels

try:
    from fomkit._kernels import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(rng, n):
    x = rng.dirichlet(np.ones(n))
    return {
        "project_simplex": (rng.normal(size=n),),
        "entropy_step": (x, rng.normal(size=n)),
        "nesterov_skokov": (rng.uniform(-1, 1, n),),
        "chain_quadratic": (rng.normal(size=n), n // 2, 0.25, 0.25),
    }


def bench(repeat, sizes):
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        for name, args in cases(rng, n).items():
            t_py = min(timeit.repeat(lambda: getattr(_pykernels, name)(*args),
                                     number=repeat, repeat=3)) / repeat
            t_c = float("nan")
            if _ckernels is not None:
                t_c = min(timeit.repeat(lambda: getattr(_ckernels, name)(*args),
                                        number=repeat, repeat=3)) / repeat
            rows.append((name, n, t_py, t_c))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--sizes", type=int, nargs="+", default=[10, 100, 1000, 10000])
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled backend not built; timing NumPy only")
    print(f"{'kernel':<18} {'n':>6} {'numpy [us]':>12} {'cython [us]':>12} {'speedup':>8}")
    for name, n, t_py, t_c in bench(args.repeat, args.sizes):
        print(f"{name:<18} {n:>6} {t_py * 1e6:>12.2f} {t_c * 1e6:>12.2f} {t_py / t_c:>8.2f}")


if __name__ == "__main__":
    main()
