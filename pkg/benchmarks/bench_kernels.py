"""Compare the compiled and pure-Python RK4 kernels.

Run with ``python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]``.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from mpcquant import kernels, scenarios


def bench_variational(backend, sys_, steps, repeat):
    plan = sys_.plan
    x0 = np.full(sys_.dim, 0.4)
    x0[0] = 1.0

    def call():
        backend.rk4_variational(plan.coef, plan.exps, plan.slot, len(plan.coef), sys_.n, x0,
                                1e-3, steps)

    return min(timeit.repeat(call, number=1, repeat=repeat))


def bench_pipeline(pure: bool) -> float:
    """Seconds for one MPC scan point (n = 3) in a fresh interpreter."""
    code = (
        "import time; from mpcquant import scenarios;"
        "from mpcquant.reduction_holonomy import PrequantizationModel, is_quantized;"
        "m = PrequantizationModel(scenarios.harmonic(3)); is_quantized(m, 1.5, seeds=1);"
        "t = time.perf_counter(); is_quantized(m, 1.5, seeds=4);"
        "print(time.perf_counter() - t)"
    )
    env = dict(os.environ, MPCQUANT_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         check=True)
    return float(out.stdout.strip())


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=2048)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    compiled = kernels.compiled_backend()
    pure = kernels.python_backend()
    if compiled is None:
        print("compiled extension not built; only the Python backend is available")
    cases = [scenarios.harmonic(1), scenarios.harmonic(3), scenarios.product_hamiltonian(2.0),
             scenarios.composed(2, "x^3+2x")]
    print(f"rk4_variational, {args.steps} steps (best of {args.repeat})")
    print(f"{'system':<24}{'python [ms]':>14}{'compiled [ms]':>16}{'speedup':>10}")
    for sys_ in cases:
        tp = bench_variational(pure, sys_, args.steps, args.repeat)
        label = f"{sys_.name} n={sys_.n}"
        if compiled is None:
            print(f"{label:<24}{tp * 1e3:>14.2f}")
            continue
        tc = bench_variational(compiled, sys_, args.steps, args.repeat)
        print(f"{label:<24}{tp * 1e3:>14.2f}{tc * 1e3:>16.3f}{tp / tc:>10.1f}")
    print("\nis_quantized, harmonic n=3, 4 seeds")
    tp = bench_pipeline(pure=True)
    print(f"  python backend:   {tp:.3f} s")
    if compiled is not None:
        tc = bench_pipeline(pure=False)
        print(f"  compiled backend: {tc:.3f} s  (speedup {tp / tc:.1f}x)")


if __name__ == "__main__":
    main()
