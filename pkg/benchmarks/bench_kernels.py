"""Time the numba and numpy kernel back ends.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 200] [--n 1 2 3 4 6]

The first numba call compiles (or loads the on-disk cache) and is excluded
from the timings. Results are cross-checked before timing.
"""

import argparse
import timeit

import numpy as np

from sjball import ModelParams, kernels
from sjball.core import aux_matrices, ordered_pairs, random_point


def _time(fn, repeat):
    fn()
    return min(timeit.repeat(fn, number=repeat, repeat=3)) / repeat


def bench(n, repeat):
    p = ModelParams(n, 3.0, 1.5)
    aux = aux_matrices(p, random_point(n, 0))
    pairs = ordered_pairs(n)
    rows = []
    for name, call in (
        ("metric", lambda kern: kern.metric_blocks(aux.M, aux.eta, p.k, p.mu, pairs)),
        ("christoffel", lambda kern: kern.christoffel(aux.X, aux.eta, p.epsilon, pairs)),
    ):
        ref = call(kernels.get_backend("numpy"))
        got = call(kernels.get_backend("numba"))
        ref = ref if isinstance(ref, tuple) else (ref,)
        got = got if isinstance(got, tuple) else (got,)
        assert all(np.allclose(a, b, atol=1e-12) for a, b in zip(ref, got))
        t_np = _time(lambda: call(kernels.get_backend("numpy")), repeat)
        t_nb = _time(lambda: call(kernels.get_backend("numba")), repeat)
        rows.append((name, n, t_np, t_nb))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=200)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3, 4, 6])
    a = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':<12}{'n':>3}{'numpy [us]':>14}{'numba [us]':>14}{'speedup':>10}")
    for n in a.n:
        for name, n_, t_np, t_nb in bench(n, a.repeat):
            print(f"{name:<12}{n_:>3}{t_np * 1e6:>14.1f}{t_nb * 1e6:>14.1f}{t_np / t_nb:>10.2f}")


if __name__ == "__main__":
    main()
