"""Compiled vs NumPy RK4 kernels on a sewing-sized workload.

    python3 benchmarks/bench_kernels.py [--steps 1024] [--substeps 32] [--repeat 5]
"""
import argparse
import time

import numpy as np

from roughhopf import _kernels_py

try:
    from roughhopf import _kernels as _compiled
except ImportError:
    _compiled = None


def workload(steps, seed=0):
    rng = np.random.default_rng(seed)
    E = np.array([[0, 0], [1, 0], [0, 1], [2, 0], [1, 1]], dtype=np.int64)
    # one unit-time flow cut into `steps` pieces, so long chains stay bounded
    Cs = rng.normal(scale=1.0 / steps, size=(steps, len(E), 2))
    return E, Cs, np.array([0.3, -0.2])


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=1024)
    ap.add_argument("--substeps", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    E, Cs, x = workload(args.steps)
    lo, hi = np.full(2, -np.inf), np.full(2, np.inf)
    rows = [("python", _kernels_py)] + ([("compiled", _compiled)] if _compiled else [])
    results = {}
    for name, mod in rows:
        t, (states, _) = best_of(lambda: mod.rk4_chain(E, Cs, x, args.substeps, lo, hi), args.repeat)
        results[name] = (t, np.asarray(states))
        print(f"{name:<9} rk4_chain  {args.steps} steps x {args.substeps} substeps  {t * 1e3:9.2f} ms")
    if len(results) == 2:
        diff = float(np.max(np.abs(results["python"][1] - results["compiled"][1])))
        print(f"speed-up {results['python'][0] / results['compiled'][0]:.1f}x, max state difference {diff:.2e}")
    else:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`")


if __name__ == "__main__":
    main()
