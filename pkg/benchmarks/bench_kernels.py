"""Compare the compiled graded-product kernel against the numpy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Two workloads per backend: the raw graded multiply at several generator
counts, and a full coherent-state evolution (the criterion-3 shape) whose
inner loop is dominated by that multiply.
"""

import argparse
import time

import numpy as np

from cohstab import kernel
from cohstab.coeffs import const_fn, sin_fn
from cohstab.dynamics import HamiltonianSpec, IntegrationConfig, evolve_schrodinger_fermion
from cohstab.fermion import make_coherent
from cohstab.grassmann import GeneratorSet


def bench_multiply(backend: str, n_gen: int, repeats: int) -> float:
    kernel.set_backend(backend)
    rng = np.random.default_rng(7)
    dim = 1 << n_gen
    x = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    y = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    kernel.multiply(x, y, n_gen)  # warm the tables
    t0 = time.perf_counter()
    for _ in range(repeats):
        kernel.multiply(x, y, n_gen)
    return (time.perf_counter() - t0) / repeats * 1e6


def bench_evolution(backend: str) -> float:
    kernel.set_backend(backend)
    gens = GeneratorSet.from_pairs(("zeta", "eta"))
    spec = HamiltonianSpec(
        "grassmann", const_fn(1.0) + sin_fn(0.5, 1.0),
        const_fn(0.4), const_fn(0.2), gens=gens, eta_generator="eta",
    )
    s0 = make_coherent(gens.gen("zeta"))
    cfg = IntegrationConfig(t_end=1.0, dt=1e-3, stride=100)
    t0 = time.perf_counter()
    evolve_schrodinger_fermion(spec, s0, cfg)
    return time.perf_counter() - t0


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=20000)
    args = parser.parse_args()

    backends = kernel.available_backends()
    if "compiled" not in backends:
        print("note: compiled kernel not built; benchmarking the fallback only")

    print(f"{'workload':<28}" + "".join(f"{b:>14}" for b in backends) + "   speedup")
    for n_gen in (2, 4, 8):
        repeats = args.repeats if n_gen < 8 else max(1, args.repeats // 10)
        row = [bench_multiply(b, n_gen, repeats) for b in backends]
        speed = f"{row[-1] / row[0]:.1f}x" if len(row) == 2 else ""
        print(f"multiply, {1 << n_gen:>3} coefficients "
              + "".join(f"{v:>11.2f} us" for v in row) + f"   {speed}")
    row = [bench_evolution(b) for b in backends]
    speed = f"{row[-1] / row[0]:.1f}x" if len(row) == 2 else ""
    print(f"{'grassmann evolution, t=1':<28}"
          + "".join(f"{v:>12.2f} s" for v in row) + f"   {speed}")

    kernel.set_backend(backends[0])


if __name__ == "__main__":
    main()
