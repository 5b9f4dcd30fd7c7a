"""Benchmark the compiled kernels against the pure-Python fallback.

Times raw right-hand-side throughput for each kernel and an end-to-end
full-vs-reduced sag comparison per backend.  Run from the repo root:

    python3 benchmarks/kernel_bench.py [--calls 200000]
"""

import argparse
import time

import numpy as np

from loadreduce import _kernels
from loadreduce.dera import DERA_DEFAULTS, _dera_kvec, dera_initialize
from loadreduce.motor import MOTOR_A, _kvec


def time_calls(fn, args, calls):
    t0 = time.perf_counter()
    for _ in range(calls):
        fn(*args)
    return (time.perf_counter() - t0) / calls


def bench_kernels(calls):
    mk = _kvec(MOTOR_A, 1.0)
    dstate, dcfg = dera_initialize((1.0, 1.0), DERA_DEFAULTS, 0.5, 0.05)
    dk = _dera_kvec(dcfg)
    u = np.array([1.0, 0.0])
    du = np.array([1.0, 1.0])
    cases = [
        ("motor_full", (np.array([0.9, -0.1, 0.85, -0.12, 0.04]), u, mk)),
        ("motor_reduced", (np.array([0.9, -0.1, 0.04]), u, mk)),
        ("dera_full", (dstate, du, dk, 1.0)),
        ("dera_reduced", (dstate[[0, 1, 5, 7]], du, dk)),
    ]

    rows = {}
    for backend in _kernels.available_backends():
        _kernels.set_backend(backend)
        for name, args in cases:
            per_call = time_calls(getattr(_kernels, name), args, calls)
            rows.setdefault(name, {})[backend] = per_call

    print(f"\nraw kernel throughput ({calls} calls each)")
    print(f"{'kernel':<14} {'python':>12} {'compiled':>12} {'speedup':>9}")
    for name, by in rows.items():
        py = by["python"]
        if "compiled" in by:
            c = by["compiled"]
            print(f"{name:<14} {py * 1e6:>10.2f}us {c * 1e6:>10.2f}us {py / c:>8.1f}x")
        else:
            print(f"{name:<14} {py * 1e6:>10.2f}us {'-':>12} {'-':>9}")


def bench_end_to_end():
    from loadreduce.harness import ScenarioConfig, run_comparison

    print("\nend-to-end sag comparison (motor A, full vs reduced, NonStiff)")
    for backend in _kernels.available_backends():
        _kernels.set_backend(backend)
        report = run_comparison(ScenarioConfig(model="motor-a"))
        print(f"{backend:<10} full {report.timing_full:.3f}s  "
              f"reduced {report.timing_reduced:.3f}s  "
              f"speedup {report.speedup:.1f}x")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--calls", type=int, default=200000)
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args()

    print("available backends:", ", ".join(_kernels.available_backends()))
    bench_kernels(args.calls)
    if not args.skip_end_to_end:
        bench_end_to_end()
    _kernels.set_backend(_kernels.BACKEND)


if __name__ == "__main__":
    main()
