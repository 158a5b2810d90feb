"""Benchmark the compiled kernels against the numpy fallback.

Per-kernel microbenchmarks import both implementation modules directly; the
end-to-end comparison re-runs this script in a subprocess with
CTNS_KERNELS=numpy so the dispatch picks the fallback for a full trajectory.

Usage: python benchmarks/bench_kernels.py [--size 128] [--reps 200]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def make_inputs(n):
    rng = np.random.Generator(np.random.Philox(42))
    nyh = n // 2 + 1
    real = lambda: np.ascontiguousarray(rng.standard_normal((n, n)))
    cplx = lambda: np.ascontiguousarray(
        rng.standard_normal((n, nyh)) + 1j * rng.standard_normal((n, nyh)))
    table = lambda: np.ascontiguousarray(np.abs(rng.standard_normal((n, nyh))))
    return {
        "semigroup_combine": (cplx(), cplx(), table(), 1e-3),
        "semigroup_combine_noise": (cplx(), cplx(), cplx(), table(), 1e-3),
        "spectral_gradient": (cplx(), table(), table()),
        "flux_divergence": (cplx(), cplx(), table(), table(), table()),
        "masked_scale": (cplx(), table()),
        "leray_project": (cplx(), cplx(), table(), table(), table()),
        "multiply": (real(), real()),
        "transport_flux": (real(), real(), real(), real()),
        "vector_max": (real(), real()),
        "nlogn_sum": (np.abs(real()) + 0.1, 1e-12),
        "hessian_defect_sum": (real(), real(), real(), real(), real(), real()),
        "quartic_cross_sums": (real(), real(), np.abs(real())),
    }


def bench_kernels(size, reps):
    from ctns._kernels import _numpy_impl

    try:
        from ctns._kernels import _core
    except ImportError:
        print("compiled backend unavailable; showing numpy timings only")
        _core = None

    inputs = make_inputs(size)
    header = f"{'kernel':26s} {'numpy':>10s} {'cython':>10s} {'speedup':>8s}"
    print(f"arrays {size} x {size}, {reps} repetitions")
    print(header)
    print("-" * len(header))

    def time_one(fn, args):
        fn(*args)  # warm up
        t0 = time.perf_counter()
        for _ in range(reps):
            fn(*args)
        return (time.perf_counter() - t0) / reps * 1e6  # microseconds

    for name, args in inputs.items():
        t_np = time_one(getattr(_numpy_impl, name), args)
        if _core is not None:
            t_cy = time_one(getattr(_core, name), args)
            print(f"{name:26s} {t_np:9.1f}u {t_cy:9.1f}u {t_np / t_cy:7.2f}x")
        else:
            print(f"{name:26s} {t_np:9.1f}u {'-':>10s} {'-':>8s}")


def bench_end_to_end(size, steps):
    from ctns import (CoefficientSet, StepperConfig, default_initial,
                      kernel_backend, make_grid, make_noise_model, run)

    grid = make_grid(size, size)
    cfg = StepperConfig(dt=1e-3, t_final=steps * 1e-3, coeffs=CoefficientSet(),
                        noise=make_noise_model(grid, 8, q0=0.05, seed=1),
                        track_dissipation=False, record_stride=steps)
    init = default_initial(grid)
    run(StepperConfig(dt=1e-3, t_final=5e-3, coeffs=cfg.coeffs, noise=cfg.noise,
                      track_dissipation=False, record_stride=5), init)  # warm up
    t0 = time.perf_counter()
    run(cfg, init)
    el = time.perf_counter() - t0
    print(f"[{kernel_backend():6s}] {steps} steps at {size} x {size}: "
          f"{el:.3f}s ({el / steps * 1e3:.3f} ms/step)")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--end-to-end-only", action="store_true",
                    help=argparse.SUPPRESS)  # used by the subprocess re-run
    args = ap.parse_args()

    if args.end_to_end_only:
        bench_end_to_end(args.size, args.steps)
        return

    bench_kernels(args.size, args.reps)
    print()
    bench_end_to_end(args.size, args.steps)
    sys.stdout.flush()
    env = dict(os.environ, CTNS_KERNELS="numpy")
    subprocess.run([sys.executable, os.path.abspath(__file__),
                    "--end-to-end-only", "--size", str(args.size),
                    "--steps", str(args.steps)], env=env, check=False)


if __name__ == "__main__":
    main()
