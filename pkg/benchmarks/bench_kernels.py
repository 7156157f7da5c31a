"""Compare the compiled and pure-numpy kernel loops.

    python benchmarks/bench_kernels.py [--repeat 3]

Prints wall time per backend and the max difference between their outputs.
"""
import argparse
import time

import numpy as np

from elasticnp import _pykernels

try:
    from elasticnp import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(rng):
    # one latitude ring of a 16-ring sphere against its local rule
    T, Q = 32, 24 * 48
    X = rng.standard_normal((T, 3))
    Y = rng.standard_normal((T, Q, 3)) + 3.0
    NY = rng.standard_normal((T, Q, 3))
    W = rng.random((T, Q))
    yield "kernel_rows_3d (32 x 1152)", "kernel_rows_3d", (X, Y, NY, W)
    for m, P, S in ((2, 1024, 2048), (3, 512, 8192)):
        tg = rng.standard_normal((P, m)) * 0.3
        src = rng.standard_normal((S, m))
        src /= np.linalg.norm(src, axis=1)[:, None]
        yield (f"potential_terms m={m} ({P} x {S})", "potential_terms",
               (tg, src, src.copy(), rng.random(S), rng.standard_normal((S, m))))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'case':42s} {'python [s]':>11s} {'cython [s]':>11s} {'speedup':>8s} {'max diff':>9s}")
    for label, name, a in cases(rng):
        a = tuple(np.ascontiguousarray(x) for x in a)
        tp, op = _best(lambda: getattr(_pykernels, name)(*a), args.repeat)
        if _ckernels is None:
            print(f"{label:42s} {tp:11.4f} {'n/a':>11s}")
            continue
        tc, oc = _best(lambda: getattr(_ckernels, name)(*a), args.repeat)
        diff = np.abs(np.asarray(op) - np.asarray(oc)).max() / max(np.abs(op).max(), 1e-300)
        print(f"{label:42s} {tp:11.4f} {tc:11.4f} {tp / tc:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
