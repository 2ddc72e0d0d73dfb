#!/usr/bin/env python3
"""Benchmark the compiled kernel core against the pure-numpy fallback.

Run after building the extension (python setup_cython.py build_ext --inplace):

    python benchmarks/bench_kernels.py [--m 2000] [--n 401] [--repeat 10]

The tridiagonal recurrences are the kernels where the compiled core pays
off; the effective-potential assembly is BLAS-backed either way and is
timed here for context (binned engine path vs exact reference path).
"""

import argparse
import time

import numpy as np


def timeit(fn, repeat):
    fn()  # warm-up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn()
    return (time.perf_counter() - t0) / repeat


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--m", type=int, default=2000, help="batch size (waves)")
    ap.add_argument("--n", type=int, default=401, help="grid points")
    ap.add_argument("--repeat", type=int, default=10)
    args = ap.parse_args()

    from tdqmc.kernels import available_backends
    backends = available_backends()
    if "cython" not in backends:
        print("compiled core not built; run: python setup_cython.py build_ext --inplace")

    rng = np.random.default_rng(0)
    psi = np.ascontiguousarray(rng.normal(size=(args.m, args.n))
                               + 1j * rng.normal(size=(args.m, args.n)))
    v = np.ascontiguousarray(rng.normal(size=(args.m, args.n)))

    print(f"batch {args.m} x {args.n}, {args.repeat} repeats")
    header = f"{'kernel':<28}" + "".join(f"{name:>12}" for name in backends)
    print(header)
    print("-" * len(header))

    rows = [
        ("cn_step_batch (real time)",
         lambda impl: impl.cn_step_batch(psi, v, 0.15, 0.02, False)),
        ("cn_step_batch (imag time)",
         lambda impl: impl.cn_step_batch(psi, v, 0.15, 0.02, True)),
        ("cayley_sweep_const",
         lambda impl: impl.cayley_sweep_const(psi, 0.15, 0.02, False)),
    ]
    for label, call in rows:
        times = {name: timeit(lambda impl=impl: call(impl), args.repeat)
                 for name, impl in backends.items()}
        line = f"{label:<28}" + "".join(f"{1e3 * times[n]:>10.2f}ms" for n in backends)
        if "cython" in times:
            line += f"   ({times['numpy'] / times['cython']:.1f}x)"
        print(line)

    # engine effective-potential paths (identical under both backends)
    from tdqmc.ensemble import KernelConfig, WalkerCloud, effective_potential_all
    from tdqmc.potentials import SoftCoreParams

    params = SoftCoreParams(2.0, 1.0)
    clouds = [WalkerCloud(i, rng.normal(0.0, 0.9, args.m)) for i in range(2)]
    kcfg = KernelConfig(alpha=(1.0, 1.0), sigma=(0.9, 0.9))
    xg = np.linspace(-30.0, 30.0, args.n)
    for mode in ("binned", "exact"):
        dt = timeit(lambda: effective_potential_all(xg, 0, clouds, kcfg,
                                                    params, mode=mode), 3)
        print(f"{'veff_all ' + mode:<28}{1e3 * dt:>10.2f}ms   (BLAS-backed)")


if __name__ == "__main__":
    main()
