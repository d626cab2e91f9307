"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel and problem size with the best-of-N wall time for
each backend, the speedup, and the largest absolute difference in output.
"""
import argparse
import time

import numpy as np

from robustprice import _pykernels

try:
    from robustprice import _ckernels
except ImportError:
    _ckernels = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(rng):
    for n in (720, 8760):
        a = rng.normal(size=(n // 24, 24)) * 10
        yield "soft_threshold", n, lambda k, a=a: k.soft_threshold(a, 1.0)
    for n, m in ((1000, 200), (8760, 500)):
        p, x = rng.normal(40, 10, n), np.linspace(0, 80, m)
        yield "gaussian_kde", f"{n}x{m}", lambda k, p=p, x=x: k.gaussian_kde(p, x, 2.0)
    for n in (1000, 8760):
        p = rng.normal(40, 10, n)
        yield "gaussian_kde_loo", n, lambda k, p=p: k.gaussian_kde_loo(p, 2.0)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<18} {'size':>10} {'numpy s':>10} {'cython s':>10} {'speedup':>8} {'max diff':>9}")
    for name, size, call in cases(rng):
        t_py, out_py = best_of(lambda: call(_pykernels), args.repeat)
        if _ckernels is None:
            print(f"{name:<18} {size!s:>10} {t_py:>10.5f} {'-':>10} {'-':>8} {'-':>9}")
            continue
        t_c, out_c = best_of(lambda: call(_ckernels), args.repeat)
        diff = float(np.abs(out_py - out_c).max())
        print(f"{name:<18} {size!s:>10} {t_py:>10.5f} {t_c:>10.5f} {t_py / t_c:>7.2f}x {diff:>9.1e}")


if __name__ == "__main__":
    main()
