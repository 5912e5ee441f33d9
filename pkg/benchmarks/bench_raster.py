#!/usr/bin/env python3
"""Benchmark the escape-depth kernels: numba backend vs numpy fallback.

Renders the same scene with both backends at a few resolutions, reports
wall time and throughput, and verifies the outputs are bit-identical.

Usage:
    python3 benchmarks/bench_raster.py [--resolutions 512,1024,2048]
        [--max-depth 2] [--repeat 3]
"""

import argparse
import time

import numpy as np

from mobpow import _kernels
from mobpow.model import ModelParams
from mobpow.raster import Window, render_depth_grid
from mobpow.sequences import RotationSequence


def scene():
    params = ModelParams(1.5, RotationSequence.from_fractions(["1/3", "1/2"]))
    return params, (-0.2, 1.05, -0.65, 0.65)


def bench(backend, params, extent, resolution, max_depth, repeat):
    window = Window(*extent, resolution, resolution)
    # warm-up render also pays any one-time compilation cost
    grid = render_depth_grid(params, window, max_depth, backend=backend)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        grid = render_depth_grid(params, window, max_depth, backend=backend)
        best = min(best, time.perf_counter() - start)
    return best, grid.depths


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--resolutions", default="512,1024,2048")
    ap.add_argument("--max-depth", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    have_numba = _kernels.numba_available()
    backends = ["numpy"] + (["numba"] if have_numba else [])
    if not have_numba:
        print("numba unavailable (not installed or MOBPOW_FORCE_NUMPY set); "
              "benchmarking numpy only")

    params, extent = scene()
    print("%8s  %-6s  %10s  %10s" % ("pixels", "kernel", "seconds", "Mpix/s"))
    for res in [int(r) for r in args.resolutions.split(",")]:
        results = {}
        for backend in backends:
            secs, depths = bench(backend, params, extent, res,
                                 args.max_depth, args.repeat)
            results[backend] = (secs, depths)
            print("%8s  %-6s  %10.4f  %10.1f"
                  % ("%dx%d" % (res, res), backend, secs,
                     res * res / secs / 1e6))
        if len(results) == 2:
            same = np.array_equal(results["numba"][1], results["numpy"][1])
            ratio = results["numpy"][0] / results["numba"][0]
            print("%8s  numba speedup %.1fx, outputs identical: %s"
                  % ("", ratio, same))
            if not same:
                raise SystemExit("backend outputs differ")


if __name__ == "__main__":
    main()
