"""Benchmark the compiled banded kernel against the pure-numpy fallback.

    python -m evanescent.bench [--L 4096 --B 64 --steps 200]

Prints per-step timings and the speedup; exercised sizes match the
diffusive-ladder production runs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _band_fallback
from ._core import BACKEND
from .moments import flow_band


def time_backend(rk4_step, L: int, B: int, steps: int) -> float:
    y = flow_band(L, B)
    bufs = [np.empty_like(y) for _ in range(3)]
    rk4_step(y, *bufs, 0.09, 1.0, 0.05)  # warm up
    t0 = time.perf_counter()
    for _ in range(steps):
        rk4_step(y, *bufs, 0.09, 1.0, 0.05)
    return (time.perf_counter() - t0) / steps


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--L", type=int, default=4096)
    parser.add_argument("--B", type=int, default=64)
    parser.add_argument("--steps", type=int, default=200)
    args = parser.parse_args(argv)

    fallback_ms = 1e3 * time_backend(_band_fallback.rk4_step, args.L, args.B,
                                     max(10, args.steps // 10))
    print(f"python fallback : {fallback_ms:8.3f} ms/step")
    if BACKEND == "compiled":
        from ._band_kernel import rk4_step as compiled_step

        compiled_ms = 1e3 * time_backend(compiled_step, args.L, args.B, args.steps)
        print(f"compiled kernel : {compiled_ms:8.3f} ms/step")
        print(f"speedup         : {fallback_ms / compiled_ms:8.1f}x")
    else:
        print("compiled kernel : not built (running on the fallback)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
