"""Time the numba and numpy kernel backends on representative workloads.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--n 4001]

The first numba call includes JIT compilation and is reported separately.
"""
import argparse
import time

import numpy as np

from atomloc import kernels
from atomloc.oracle import integrate_batch, linear_systems, solve_batch
from atomloc.roots import cubic_coefficients
from atomloc.model import ModelParams
from atomloc.scan import periodic_grid

FIG6 = ModelParams(20.0, 22.0, 25.0, phi=0.0, gamma1=1.0, gamma2=1.0)


def workloads(n):
    kx = periodic_grid(n)
    s = np.sin(kx)
    p, q = cubic_coefficients(FIG6, s)
    rng = np.random.default_rng(0)
    m, b = linear_systems(*(rng.uniform(0, 50, 1000) for _ in range(3)), 1.0,
                          rng.uniform(0, 10, 1000), rng.uniform(-30, 30, 1000),
                          rng.uniform(-np.pi, np.pi, 1000), phi3=rng.uniform(0, 6.28, 1000))
    mi, bi = m[:100], b[:100]
    return {
        "chi_parts": lambda be: kernels.chi_parts(20.0, 22.0, 25.0, 1.0, 1.0, 1.0, 1.0,
                                                  5.0, s, backend=be),
        "cubic_roots": lambda be: kernels.cubic_roots(p, q, backend=be),
        "solve3 x1000": lambda be: solve_batch(m, b, backend=be),
        "rk4 relax x100": lambda be: integrate_batch(mi, bi, 0.001, backend=be),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--n", type=int, default=4001, help="grid size for the per-point kernels")
    args = ap.parse_args()

    jobs = workloads(args.n)
    backends = kernels.available()
    print(f"backends: {', '.join(backends)}")
    if "numba" in backends:
        t0 = time.perf_counter()
        for fn in jobs.values():
            fn("numba")
        print(f"numba warm-up (JIT compile): {time.perf_counter() - t0:.2f} s")
    print(f"{'kernel':<16s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for name, fn in jobs.items():
        t = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        row = f"{name:<16s}" + "".join(f"{t[b] * 1e3:>10.2f}ms" for b in backends)
        if "numba" in t:
            row += f"  {t['numpy'] / t['numba']:>8.1f}x"
        print(row)


if __name__ == "__main__":
    main()
