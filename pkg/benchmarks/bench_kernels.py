"""Compiled vs pure-Python kernels.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from dpii import _pykernels

try:
    from dpii import _ckernels
except ImportError:
    _ckernels = None


def _thomas_case(n, seed=0):
    rng = np.random.default_rng(seed)
    return (rng.uniform(-1, 1, n - 1), rng.uniform(2.5, 4, n), rng.uniform(-1, 1, n - 1),
            rng.normal(size=n), 1e-300)


def _rk_case():
    # oscillatory small-amplitude U-form shot over [-12, 2], ~3000 steps
    return (2.0, 0.0, -12.0, 0.05, 0.0, 2.0, 1e-12, 1e-14, 1e-3, 10.0, 1e-3,
            False, False, 2_000_000)


def bench(repeat):
    cases = [
        ("thomas n=1000", "thomas", _thomas_case(1000)),
        ("thomas n=32000", "thomas", _thomas_case(32000)),
        ("rk_integrate [-12, 2]", "rk_integrate", _rk_case()),
    ]
    rows = []
    for label, name, args in cases:
        times = {}
        for tag, mod in (("python", _pykernels), ("compiled", _ckernels)):
            if mod is None:
                continue
            fn = getattr(mod, name)
            times[tag] = min(timeit.repeat(lambda: fn(*args), number=1, repeat=repeat))
        rows.append((label, times))
    return rows


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; timing the Python kernels only")
    print(f"{'case':24s} {'python [ms]':>12s} {'compiled [ms]':>14s} {'speed-up':>9s}")
    for label, t in bench(args.repeat):
        py = t["python"] * 1e3
        if "compiled" in t:
            c = t["compiled"] * 1e3
            print(f"{label:24s} {py:12.3f} {c:14.3f} {py / c:8.1f}x")
        else:
            print(f"{label:24s} {py:12.3f} {'-':>14s} {'-':>9s}")


if __name__ == "__main__":
    main()
