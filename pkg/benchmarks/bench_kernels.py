#!/usr/bin/env python3
"""Benchmark the compiled kernel backend against the pure NumPy fallback.

Workloads mirror how the package actually uses the kernels: single matrix
exponentials, uniform-grid trajectory propagation, the adaptive integrator,
and the positivity-sweep pattern (many short trajectories at different
parameters). Run after building the extension:

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]
"""

import argparse
import time

import numpy as np

from vsys import _kernels
from vsys.generators import build_nonsecular_vectorized
from vsys.physics import SystemParams


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def workloads(quick: bool):
    gen = build_nonsecular_vectorized(SystemParams.from_nbar(0.0633, 12.0))
    a, d = gen.a, gen.d
    n_expm = 200 if quick else 2000
    long_grid = np.linspace(0.0, 20.0, 501 if quick else 5001)
    rk_grid = np.linspace(0.0, 20.0, 201)
    sweep_grid = np.linspace(0.0, 20.0, 101)
    n_sweep = 50 if quick else 400
    rng = np.random.default_rng(3)
    sweep_params = [
        SystemParams.from_nbar(float(rng.uniform(0, 0.2)), float(rng.uniform(0, 15)))
        for _ in range(n_sweep)
    ]

    def bench_expm(impl):
        for i in range(n_expm):
            impl.expm(a * (0.01 * (i % 37)))

    def bench_propagate(impl):
        impl.propagate_affine(a, d, long_grid)

    def bench_rk(impl):
        impl.rk45_affine(a, d, rk_grid, 1e-10)

    def bench_sweep(impl):
        for p in sweep_params:
            g = build_nonsecular_vectorized(p)
            impl.propagate_affine(g.a, g.d, sweep_grid)

    return [
        (f"expm 4x4 x{n_expm}", bench_expm),
        (f"propagate {len(long_grid)}-point grid", bench_propagate),
        ("adaptive RK to t=20, tol 1e-10", bench_rk),
        (f"parameter sweep x{n_sweep}", bench_sweep),
    ]


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--quick", action="store_true")
    args = parser.parse_args()

    backends = {name: _kernels.get_backend(name)
                for name in _kernels.available_backends()}
    if "cython" not in backends:
        print("compiled backend not built; run pip install -e . first")
    print(f"backends: {', '.join(backends)}   (best of {args.repeat})\n")
    header = f"{'workload':36s}" + "".join(f"{name:>12s}" for name in backends)
    print(header + ("     speedup" if len(backends) == 2 else ""))
    print("-" * len(header) + "-" * 12)
    for label, fn in workloads(args.quick):
        times = {name: best_of(lambda impl=impl: fn(impl), args.repeat)
                 for name, impl in backends.items()}
        row = f"{label:36s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times.values())
        if len(times) == 2:
            py, cy = times.get("python"), times.get("cython")
            row += f"{py / cy:11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
