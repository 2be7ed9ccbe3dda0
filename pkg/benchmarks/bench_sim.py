"""Compiled kernels against the numpy fallback.

Run: python benchmarks/bench_sim.py [--paths N]
"""

import argparse
import math
import time

import numpy as np

from optbankrupt.model import ModelParams
from optbankrupt.sim import _fallback, backend
from optbankrupt.sim.engine import SimConfig, budget_contributions
from optbankrupt.solve import solve_model


def _best(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--paths", type=int, default=2000)
    ap.add_argument("--steps", type=int, default=1_000_000)
    args = ap.parse_args()
    if not backend.COMPILED:
        print("compiled extension not available; only the fallback can be timed")
        return
    fast = backend.kernels

    print(f"{'kernel':<16}{'cython s':>12}{'numpy s':>12}{'speedup':>10}{'max diff':>12}")

    def row(name, f_fast, f_slow, diff):
        a, x = _best(f_fast)
        b, y = _best(f_slow)
        print(f"{name:<16}{a:>12.4f}{b:>12.4f}{b / a:>10.1f}{diff(x, y):>12.2e}")

    n = args.steps
    out1, out2 = np.empty(n), np.empty(n)
    row("fill_normals",
        lambda: (fast.fill_normals(1, 0, 0, out1), out1)[1],
        lambda: (_fallback.fill_normals(1, 0, 0, out2), out2)[1],
        lambda x, y: float(np.max(np.abs(x - y))))

    inc = out1 * 0.01
    w1, w2 = np.empty(n + 1), np.empty(n + 1)
    row("reflected_walk",
        lambda: (fast.reflected_walk(inc, 0.0, 0.3, w1), w1)[1],
        lambda: (_fallback.reflected_walk(inc, 0.0, 0.3, w2), w2)[1],
        lambda x, y: float(np.max(np.abs(x - y))))

    sol = solve_model(ModelParams(x0=25.0))
    cfg = SimConfig(dt=1e-3, horizon=50.0, n_paths=args.paths, seed=11)

    def run(mod):
        saved = backend.kernels
        backend.kernels = mod
        try:
            return budget_contributions(sol, cfg)[0]
        finally:
            backend.kernels = saved

    row("budget_paths", lambda: run(fast), lambda: run(_fallback),
        lambda x, y: float(np.max(np.abs(x - y) / np.abs(y))))
    a, vals = _best(lambda: run(fast), repeat=1)
    print(f"\nbudget identity, {args.paths} paths: gap {vals.mean() - 25.0:+.4f} "
          f"(se {vals.std(ddof=1) / math.sqrt(vals.size):.4f}), "
          f"{a / args.paths * 1e5:.1f} s per 1e5 paths compiled")


if __name__ == "__main__":
    main()
