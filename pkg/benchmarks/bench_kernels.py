"""Time the compiled kernels against the pure-numpy fallback.

Run twice to compare backends:

    python3 benchmarks/bench_kernels.py
    CESPDC_PURE_PYTHON=1 python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from cespdc import _kernels


def timeit(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(7)
    print(f"backend: {_kernels.BACKEND}")

    detuning = rng.uniform(-250e6, 250e6, 2_000_000)
    t = timeit(_kernels.airy, detuning, 496e6, 1772.0)
    print(f"airy          2.0e6 pts   {t*1e3:8.2f} ms")

    tau = np.linspace(-50e-9, 50e-9, 200_000)
    delta = np.arange(-5, 6) * 497.75e6
    w = np.exp(-np.abs(np.arange(-5, 6)) / 2.0)
    t = timeit(_kernels.comb_factor, tau, delta, w)
    print(f"comb_factor   2.0e5 x 11  {t*1e3:8.2f} ms")

    deltas = rng.uniform(-250e6, 250e6, 200)

    def overlap_batch():
        for d in deltas:
            _kernels.pair_overlap(d, 497.75e6, 1772.0, 494.25e6, 1772.0,
                                  248.875e6, 4096)

    t = timeit(overlap_batch)
    print(f"pair_overlap  200 x 4k    {t*1e3:8.2f} ms")

    n = 1_000_000
    sig = np.sort(rng.integers(0, 20_000_000_000_000, n)).astype(np.int64)
    idl = np.sort(sig + rng.integers(-40_000, 40_000, n)).astype(np.int64)
    t = timeit(_kernels.bin_pairs, sig, idl, 625, 100_000)
    print(f"bin_pairs     1.0e6 evts  {t*1e3:8.2f} ms")


if __name__ == "__main__":
    main()
