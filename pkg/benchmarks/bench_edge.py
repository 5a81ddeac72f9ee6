"""Benchmark the compiled edge kernel against the pure-Python fallback.

Runs identical upper-edge solves through factorcount._edgecore and
factorcount._edgepy on matched inputs, checks the results agree, and
prints per-solve times plus the speedup. The deflating selectors solve
one edge per accepted factor, so per-solve latency at large p is the
number that matters.

Usage: python3 benchmarks/bench_edge.py [--repeats N]
"""

import argparse
import time

import numpy as np

from factorcount import _edgepy

try:
    from factorcount import _edgecore
except ImportError:
    _edgecore = None


def solve_many(kernel, problems, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = [
            kernel.solve_edge(gamma, w, phi, float(phi.max()))
            for gamma, w, phi in problems
        ]
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rng = np.random.default_rng(20240917)
    print(f"{'p':>7} {'gamma':>6} {'pure (ms)':>12} {'compiled (ms)':>14} {'speedup':>8}")
    for p in (10, 100, 1000, 10000):
        for gamma in (0.3, 1.0, 3.0):
            problems = []
            for _ in range(8):
                atoms = rng.uniform(1.0, 2.0, p)
                w = np.full(p, 1.0 / p)
                problems.append((gamma, w, atoms))
            t_pure, out_pure = solve_many(_edgepy, problems, args.repeats)
            if _edgecore is None:
                print(f"{p:>7} {gamma:>6} {t_pure/8*1e3:>12.3f} {'n/a':>14} {'n/a':>8}")
                continue
            t_comp, out_comp = solve_many(_edgecore, problems, args.repeats)
            worst = max(
                abs(a[2] - b[2]) / abs(b[2]) for a, b in zip(out_pure, out_comp)
            )
            assert worst < 1e-9, f"backends disagree by {worst}"
            print(
                f"{p:>7} {gamma:>6} {t_pure/8*1e3:>12.3f} {t_comp/8*1e3:>14.3f}"
                f" {t_pure/t_comp:>7.1f}x"
            )
    if _edgecore is None:
        print("compiled kernel not built; only the fallback was timed")


if __name__ == "__main__":
    main()
