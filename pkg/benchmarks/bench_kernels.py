"""Compare the compiled kernels with the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the two hot kernels directly, then one end-to-end GC estimate per
backend in a fresh interpreter (the backend is fixed at import).
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from gencap import _pykernels

try:
    from gencap import _ckernels
except ImportError:
    _ckernels = None

END_TO_END = """
import time
from gencap import BACKEND, BetaGrid, EstimatorSpec, ModelParams, estimate_gc
p = ModelParams.standard(16, None, 2.0)
t = time.perf_counter()
estimate_gc(p, BetaGrid.logspace(0.01, 20, 100), EstimatorSpec(m=10, master_seed=0))
print(BACKEND, time.perf_counter() - t)
"""


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(repeat):
    rng = np.random.default_rng(0)
    backends = [("numpy", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    rows = []
    for n, nb in [(256, 100), (65_536, 100), (1 << 20, 20)]:
        costs = rng.normal(size=n) * 10
        betas = np.geomspace(0.01, 20, nb)
        offsets = rng.normal(size=n)
        for name, mod in backends:
            t = _best(lambda: mod.logsumexp_grid(costs, betas, offsets), repeat)
            rows.append(("logsumexp_grid", f"n={n} betas={nb}", name, t))
    for n, k in [(10_000, 4), (200_000, 8)]:
        coef = rng.normal(size=200)
        support = np.sort(rng.integers(0, 200, size=(n, k)), axis=1)
        for name, mod in backends:
            t = _best(lambda: mod.support_sums(coef, support), repeat)
            rows.append(("support_sums", f"rows={n} k={k}", name, t))
    return rows


def end_to_end():
    out = []
    for flag in ("0", "1"):
        env = dict(os.environ, GENCAP_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True,
                             text=True, check=True)
        name, secs = res.stdout.split()
        out.append((name, float(secs)))
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; timing the numpy fallback only")
    print(f"{'kernel':<16}{'size':<24}{'backend':<9}{'best (ms)':>10}")
    for kernel, size, name, t in kernel_rows(args.repeat):
        print(f"{kernel:<16}{size:<24}{name:<9}{1e3 * t:>10.3f}")
    print("\nestimate_gc, d=16 full space, 100 betas, m=10")
    for name, secs in end_to_end():
        print(f"  {name:<8}{secs:8.3f} s")


if __name__ == "__main__":
    main()
