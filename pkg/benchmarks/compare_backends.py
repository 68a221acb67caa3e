"""Benchmark the compiled kernels against the pure-Python fallback.

Times the two hot paths — LZ76 parsing and layer simulation — on identical
inputs for both backends and verifies their outputs agree bit-for-bit.

Usage: python3 benchmarks/compare_backends.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from snnlzc import _kernels_py
from snnlzc.neuron import LifParams

try:
    from snnlzc import _kernels

    BACKENDS = {"cython": _kernels, "python": _kernels_py}
except ImportError:
    BACKENDS = {"python": _kernels_py}


def _time(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_lz76(repeats: int) -> None:
    rng = np.random.default_rng(12345)
    cases = {
        "lz76 1024 bits x100": [
            (rng.random(1024) < 0.3).astype(np.uint8) for _ in range(100)
        ],
        "lz76 100k bits": [(rng.random(100_000) < 0.3).astype(np.uint8)],
    }
    for label, seqs in cases.items():
        results = {}
        timings = {}
        for name, mod in BACKENDS.items():
            timings[name] = _time(
                lambda mod=mod: [mod.lz76_starts_lengths(s) for s in seqs], repeats
            )
            results[name] = [mod.lz76_starts_lengths(s) for s in seqs]
        _report(label, timings)
        _check_equal(results)


def bench_simulate(repeats: int) -> None:
    rng = np.random.default_rng(54321)
    p = LifParams()
    for n, t in ((16, 1024), (64, 4096)):
        pre = (rng.random((n, t)) < 0.05).astype(np.uint8)
        w = rng.uniform(0.0, 2.0 / (n * 0.05), size=(n, n))
        b = np.zeros(n)
        args = (
            pre, w, b, 1.0, p.tau_m_ms, p.r_m, p.v_th, p.v_reset, p.v_rest,
            False, 0.0, 1.0, 0.0, 0.0, False,
        )
        results = {}
        timings = {}
        for name, mod in BACKENDS.items():
            timings[name] = _time(lambda mod=mod: mod.simulate_layer(*args), repeats)
            results[name] = mod.simulate_layer(*args)
        _report(f"simulate_layer n={n} T={t}", timings)
        _check_equal({k: [v[0]] for k, v in results.items()})


def _report(label: str, timings: dict[str, float]) -> None:
    parts = [f"{name} {seconds * 1e3:8.2f} ms" for name, seconds in timings.items()]
    line = f"{label:28s} " + "  ".join(parts)
    if len(timings) == 2:
        py, cy = timings["python"], timings["cython"]
        line += f"  speedup {py / cy:6.1f}x"
    print(line)


def _check_equal(results: dict[str, list]) -> None:
    if len(results) < 2:
        return
    ref = results["cython"]
    for got, want in zip(results["python"], ref):
        for a, b in zip(np.atleast_1d(got), np.atleast_1d(want)):
            np.testing.assert_array_equal(a, b)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    if len(BACKENDS) == 1:
        print("compiled backend unavailable; timing the python fallback only")
    bench_lz76(args.repeats)
    bench_simulate(args.repeats)


if __name__ == "__main__":
    main()
