"""Benchmark the dual-solver kernels: numba backend vs pure-numpy fallback.

Runs the same warm-started incremental workload (an active-learning session
growing one sample per iteration) and a batch of cold solves under each
backend in a subprocess, so each process picks its backend via MCLE_BACKEND.

Usage: python3 benchmarks/bench_solver.py [--iters 150] [--repeats 3]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, os, time
import numpy as np
from mcle import active_backend
from mcle._kernels import solve_dual
from mcle.data import generate_synthetic
from mcle.engine import create_session, run_to_completion
from mcle.prior import PriorSchedule
from mcle.sampler import StrategyConfig

iters = int(os.environ["BENCH_ITERS"])

# warm-up (numba JIT compilation happens here, outside the timed region)
K0 = np.eye(3); y0 = np.array([1.0, -1.0, 1.0])
solve_dual(K0, y0, np.zeros(3), 1.0, 1e-3, 100, constrained=True)
solve_dual(K0, y0, np.zeros(3), 1.0, 1e-3, 100, constrained=False)

bundle = generate_synthetic(5, 100, 16, 0.5, seed=7)

t0 = time.perf_counter()
s = create_session(bundle, "c0", strategy=StrategyConfig(kind="mcle"),
                   schedule=PriorSchedule(kind="constant"), max_iters=iters)
run_to_completion(s)
session_time = time.perf_counter() - t0

rng = np.random.default_rng(0)
problems = []
for _ in range(50):
    n = int(rng.integers(40, 120))
    x = rng.normal(size=(n, 16))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    if abs(y.sum()) == n:
        y[0] = -y[0]
    problems.append((x @ x.T, y))

t0 = time.perf_counter()
for K, y in problems:
    solve_dual(K, y, np.zeros(len(y)), 1.0, 1e-4, 100000, constrained=True)
cold_time = time.perf_counter() - t0

print(json.dumps({"backend": active_backend(),
                  "session_s": session_time, "cold_s": cold_time}))
"""


def run_backend(backend, iters, repeats):
    best = None
    for _ in range(repeats):
        env = dict(os.environ, MCLE_BACKEND=backend, BENCH_ITERS=str(iters))
        out = subprocess.run([sys.executable, "-c", WORKER], env=env,
                             capture_output=True, text=True, check=True)
        r = json.loads(out.stdout.strip().splitlines()[-1])
        assert r["backend"] == backend
        if best is None:
            best = r
        else:
            best["session_s"] = min(best["session_s"], r["session_s"])
            best["cold_s"] = min(best["cold_s"], r["cold_s"])
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--iters", type=int, default=150,
                    help="session length for the warm-start workload")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    results = {}
    for backend in ("numpy", "numba"):
        try:
            results[backend] = run_backend(backend, args.iters, args.repeats)
        except subprocess.CalledProcessError as exc:
            print(f"{backend}: unavailable ({exc.stderr.strip().splitlines()[-1]})")

    print(f"{'backend':<8} {'session(' + str(args.iters) + ' iters)':>20} "
          f"{'50 cold solves':>16}")
    for backend, r in results.items():
        print(f"{backend:<8} {r['session_s']:>19.3f}s {r['cold_s']:>15.3f}s")
    if len(results) == 2:
        su = results["numpy"]["session_s"] / results["numba"]["session_s"]
        cu = results["numpy"]["cold_s"] / results["numba"]["cold_s"]
        print(f"numba speedup: session {su:.1f}x, cold solves {cu:.1f}x")


if __name__ == "__main__":
    main()
