"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--n 200000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from stratcheck import kernels
from stratcheck.expr import parse
from stratcheck.program import compile_expr

G_TEXT = "z^(x^2+1)"
F_TEXT = "z - z/ln(z)*ln(x + sqrt(x^2 + z^2))"


def best(fn, repeat):
    out = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t)
    return min(out)


def cases(n):
    rng = np.random.default_rng(7)
    xz = np.column_stack([rng.uniform(0.05, 0.5, n), rng.uniform(1e-3, 0.5, n)])
    off = rng.uniform(-1, 1, (n, 2))
    off3 = rng.uniform(-1, 1, (n, 3))
    g = compile_expr(parse(G_TEXT), ("x", "z"))
    f = compile_expr(parse(F_TEXT), ("x", "z"))
    c = np.array([0.2, 0.25])
    yield "eval_batch g", lambda b: kernels.eval_batch(g, xz, b)
    yield "eval_batch f", lambda b: kernels.eval_batch(f, xz, b)
    yield "graph_moments g", lambda b: kernels.graph_moments(g, off, c, 0.25 ** 1.04, 0.1, b)
    yield "region_count g", lambda b: kernels.region_count(
        g, off3, np.array([0, 2]), 1, np.array([0.2, 0.0, 0.25]), 0.0, 0.1, b
    )


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    if kernels._compiled is None:
        print("compiled extension not built; only the python backend is timed")
    print(f"{'kernel':<18}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, fn in cases(a.n):
        tp = best(lambda: fn("python"), a.repeat)
        if kernels._compiled is None:
            print(f"{name:<18}{tp:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc = best(lambda: fn("compiled"), a.repeat)
        print(f"{name:<18}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
