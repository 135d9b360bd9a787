"""Compiled vs pure-Python kernels, plus one full engine run under each backend.

    python benchmarks/bench_kernels.py [--repeat 5] [--engine-n 80]
"""
from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

import numpy as np

from frontweave import _pykernels

try:
    from frontweave import _kernels
except ImportError:
    _kernels = None


def _cases():
    rng = random.Random(0)
    quads = [(rng.uniform(0, 1), rng.uniform(0, 1), rng.uniform(0.01, 0.5), rng.uniform(0.01, 0.5)) for _ in range(2000)]
    g = np.random.default_rng(0)
    row = np.sort(g.random(401))
    fv = g.random(401) - 0.5
    pad = g.random((324, 324))
    f = g.random((320, 320)) - 0.5
    return {
        "quadrant_minimize x2000": lambda k: [k.quadrant_minimize(*q) for q in quads],
        "fmm_update x2000": lambda k: [k.fmm_update(q[0], q[1], 0.01, 1.0) for q in quads],
        "sideways_row n=401 x50": lambda k: [k.sideways_row(row, fv, -1.0, 0.01, 0.002) for _ in range(50)],
        "scheme_g x2000": lambda k: [k.scheme_g(q[0], q[1], q[2], 1.0, 0.5, 0.001, 0.01) for q in quads],
        "godunov_norm 320^2": lambda k: k.godunov_norm(pad, f, 0.01),
        "xi_scan_min 1e5 points": lambda k: k.xi_scan_min(0.0, 0.05, 0.1, 0.12, 100_000),
    }


def bench(repeat: int) -> list:
    rows = []
    for name, fn in _cases().items():
        t_py = min(timeit.repeat(lambda: fn(_pykernels), number=1, repeat=repeat))
        t_c = min(timeit.repeat(lambda: fn(_kernels), number=1, repeat=repeat)) if _kernels else float("nan")
        rows.append((name, t_py, t_c))
    return rows


ENGINE = (
    "import time; from frontweave.study import run_example; from frontweave import BACKEND;"
    "t = time.perf_counter(); run_example('ex1', {n}); print(BACKEND, time.perf_counter() - t)"
)


def engine_times(n: int) -> dict:
    out = {}
    for pure in ("0", "1"):
        env = dict(os.environ, FRONTWEAVE_PURE=pure)
        res = subprocess.run([sys.executable, "-c", ENGINE.format(n=n)], env=env, capture_output=True, text=True, check=True)
        backend, secs = res.stdout.split()
        out[backend] = float(secs)
    return out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--engine-n", type=int, default=80, help="ex1 grid for the end-to-end run (0 skips it)")
    args = ap.parse_args(argv)
    print(f"{'kernel':28s} {'python s':>10s} {'compiled s':>11s} {'speed-up':>9s}")
    for name, tp, tc in bench(args.repeat):
        print(f"{name:28s} {tp:10.4f} {tc:11.5f} {tp / tc:8.1f}x")
    if args.engine_n:
        t = engine_times(args.engine_n)
        print(f"ex1 engine n={args.engine_n}: python {t.get('python', float('nan')):.2f}s, "
              f"compiled {t.get('compiled', float('nan')):.2f}s")


if __name__ == "__main__":
    main()
