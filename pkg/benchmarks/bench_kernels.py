"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Every kernel is run once on each backend before timing (numba compiles on
first call) and the two outputs are compared.
"""
import argparse
import time

import numpy as np

from relex import cayley as C
from relex import tower as T
from relex.kernels import numba_impl, numpy_impl


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def cases():
    cay = C.build_cayley(T.box_family("sl2-surrogate", 3).enumerate())
    ip, ix = cay.neighbor_csr()
    yield "bfs (4096 vertices)", lambda k: k.bfs_csr(ip, ix, 0)

    small = C.build_cayley(T.box_family("sl2-surrogate", 2).enumerate())
    yield "all pairs (128 vertices)", lambda k: k.all_pairs_csr(*small.neighbor_csr())

    g = C.cycle_graph(20)
    eu, ev = g.edges().T
    yield "cheeger exhaustive (C20)", lambda k: k.cheeger_exhaustive(20, eu, ev, 1, 10)

    rng = np.random.default_rng(0)
    X = rng.standard_normal((small.n, 16))
    D = small.all_pairs()
    yield "pair profile (128 points)", lambda k: k.pair_profile(X, D, int(D.max()))


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-12, equal_nan=True)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba backend unavailable (RELEX_BACKEND=numpy or import failed)")
    print(f"{'kernel':28s} {'numpy s':>10s} {'numba s':>10s} {'speedup':>8s}  agree")
    for name, fn in cases():
        fn(numba_impl)
        a, t_np = best_of(lambda: fn(numpy_impl), args.repeat)
        b, t_nb = best_of(lambda: fn(numba_impl), args.repeat)
        print(f"{name:28s} {t_np:10.4f} {t_nb:10.4f} {t_np / t_nb:8.1f}  {same(a, b)}")


if __name__ == "__main__":
    main()
