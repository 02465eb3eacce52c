"""Compiled vs numpy kernels, and an end-to-end solver run under each backend.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from msce import _pykernels

try:
    from msce import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time
from msce import kernels
from msce.simulators import Simulator, evaluate, get_spec
from msce.solvers import BudgetPlan, msce_solve
spec = get_spec("easom")
g0 = evaluate(spec, (0.8, 0.2)).values
start = time.perf_counter()
msce_solve(Simulator(spec), g0, [145, 37, 132], BudgetPlan(15, 30), seed=1)
print(kernels.BACKEND, time.perf_counter() - start)
"""


def cases(rng):
    cand, train = rng.random((5000, 3)), rng.random((50, 3))
    theta, power = rng.uniform(0.1, 10, 3), np.full(3, 1.95)
    design = rng.random((30, 3))
    return {
        "corr_cross 5000x50, d=3": lambda k: k.corr_cross(cand, train, theta, power),
        "corr_self 50x50, d=3": lambda k: k.corr_self(train, theta, power),
        "maxpro_sum n=30, d=3": lambda k: k.maxpro_sum(design),
        "min_distance n=30, d=3": lambda k: k.min_distance(design),
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _ckernels is None:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':<28}{'numpy (ms)':>12}{'cython (ms)':>13}{'speed-up':>10}")
    for name, call in cases(np.random.default_rng(0)).items():
        times = []
        for backend in (_pykernels, _ckernels):
            number = 20
            best = min(timeit.repeat(lambda: call(backend), number=number, repeat=args.repeat))
            times.append(1000 * best / number)
        print(f"{name:<28}{times[0]:>12.3f}{times[1]:>13.3f}{times[0] / times[1]:>9.1f}x")

    print("\nend-to-end msce_solve (Easom, n0=15, N=30):")
    for pure in ("", "1"):
        env = dict(os.environ, MSCE_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                             text=True, check=True).stdout.split()
        print(f"  {out[0]:<8}{float(out[1]):8.2f} s")


if __name__ == "__main__":
    main()
