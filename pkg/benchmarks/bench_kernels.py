"""Time the numpy and compiled kernel backends on the same workloads.

Run ``python3 benchmarks/bench_kernels.py``; each row reports the best of
several repeats and the largest difference between the two backends.
"""

import argparse
import time

import numpy as np

from dbspace import backend, hb


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def workloads(E, n_nodes, n_points, rng):
    w = rng.uniform(-3, 3, n_nodes) + 1j * rng.uniform(0.1, 3, n_nodes)
    w[::4] = np.conj(w[::4])
    z = rng.uniform(-5, 5, n_points) + 1j * rng.uniform(-2, 5, n_points)
    return {
        "s_matrix": lambda: E.s(w, z),
        "log_theta": lambda: E.log_theta(z),
        "log_abs": lambda: E.log_abs(z),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--zeros", type=int, default=40, help="zeros of the synthetic fixture")
    args = p.parse_args(argv)
    if "compiled" not in backend.available():
        print("compiled backend not built; nothing to compare")
        return 1
    rng = np.random.default_rng(0)
    zs = rng.uniform(-10, 10, args.zeros) - 1j * rng.uniform(0.1, 3, args.zeros)
    fixtures = [hb.builtin_fixture("mixed"), hb.StructureFunction(1.0, zs, 1.0, "synthetic")]
    prev = backend.current()
    print(f"{'fixture':>10} {'kernel':>10} {'python s':>10} {'compiled s':>10} "
          f"{'speedup':>8} {'max rel diff':>12}")
    try:
        for E in fixtures:
            for name, fn in workloads(E, args.nodes, args.points, rng).items():
                backend.use("python")
                ref = fn()
                tp = _best(fn, args.repeat)
                backend.use("compiled")
                out = fn()
                tc = _best(fn, args.repeat)
                scale = np.maximum(np.abs(ref), 1.0)
                diff = float(np.max(np.abs(out - ref) / scale))
                print(f"{E.name:>10} {name:>10} {tp:10.4f} {tc:10.4f} "
                      f"{tp / tc:8.1f} {diff:12.2e}")
    finally:
        backend.use(prev)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
