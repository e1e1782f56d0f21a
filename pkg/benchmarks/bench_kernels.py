#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the numpy fallback.

Times the objective/gradient kernel (the L-BFGS inner loop), the amplitude
series kernel, and an end-to-end multistart ensemble on each backend.

    python benchmarks/bench_kernels.py [--sizes 9 13 15] [--restarts 20]

Numbers depend on BLAS threading; pin OMP_NUM_THREADS=1 for stable results.
"""

import argparse
import time

import numpy as np

import spinbias as sb
from spinbias import _kernels


def time_call(fn, min_seconds=0.3):
    fn()  # warm up
    n, elapsed = 0, 0.0
    start = time.perf_counter()
    while elapsed < min_seconds:
        fn()
        n += 1
        elapsed = time.perf_counter() - start
    return elapsed / n


def bench_backend(backend, sizes, restarts):
    _kernels.set_backend(backend)
    rng = np.random.default_rng(0)
    rows = []
    for n in sizes:
        spec = sb.NetworkSpec("ring", n)
        h = sb.build_reduced_hamiltonian(spec, rng.uniform(0, 10, n))
        eig = sb.eigendecompose(h)
        times = np.linspace(0.0, 30.0, 2000)
        t_obj = time_call(lambda: _kernels.objective_core(h, 0, n // 2, 3.7))
        t_amp = time_call(lambda: _kernels.amplitudes(eig.evals, eig.vecs, 0, n // 2, times))
        rows.append((n, t_obj * 1e6, t_amp * 1e3))

    problem = sb.TransferProblem(
        spec=sb.NetworkSpec("ring", 13), in_node=1, out_node=5, constraint="symmetric"
    )
    strategy = sb.InitStrategy(kind="symmetric-chain-peaks", seed=0)
    start = time.perf_counter()
    ens = sb.run_ensemble(problem, strategy, restarts)
    t_ens = time.perf_counter() - start
    return rows, t_ens, ens.best.infidelity


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[9, 13, 15])
    parser.add_argument("--restarts", type=int, default=20)
    args = parser.parse_args()

    backends = ["python"]
    if _kernels.compiled_available():
        backends.append("compiled")
    else:
        print("note: compiled extension not built, benchmarking fallback only")

    results = {}
    for backend in backends:
        rows, t_ens, best = bench_backend(backend, args.sizes, args.restarts)
        results[backend] = (rows, t_ens)
        print(f"\n[{backend}]")
        print(f"  {'N':>3}  {'objective+grad':>16}  {'2000-pt series':>15}")
        for n, us, ms in rows:
            print(f"  {n:>3}  {us:>13.1f} us  {ms:>12.2f} ms")
        print(f"  13-ring ensemble, {args.restarts} restarts: {t_ens:.2f} s "
              f"(best infidelity {best:.2e})")

    if len(backends) == 2:
        print("\n[speedup compiled vs python]")
        py_rows, py_ens = results["python"]
        cy_rows, cy_ens = results["compiled"]
        for (n, us_p, ms_p), (_, us_c, ms_c) in zip(py_rows, cy_rows):
            print(f"  N={n}: objective x{us_p / us_c:.1f}, series x{ms_p / ms_c:.1f}")
        print(f"  ensemble x{py_ens / cy_ens:.1f}")
    _kernels.set_backend("auto")


if __name__ == "__main__":
    main()
