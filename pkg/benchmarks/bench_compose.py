#!/usr/bin/env python3
"""Benchmark the compiled compositing kernel against the numpy fallback.

Run after an editable install:

    python3 benchmarks/bench_compose.py [--repeats 2000] [--size 160]
"""

import argparse
import time

import numpy as np

from peginhole.camera import make_procedural_mask
from peginhole.compose import available_backends
from peginhole.world import FrameScale, PegSpec


def bench(fn, size, repeats):
    rng = np.random.default_rng(0)
    mask = make_procedural_mask(PegSpec(), FrameScale(), size=size).image.pixels
    half = size // 2
    bg_left = rng.integers(0, 256, (size, half), dtype=np.uint8)
    bg_right = rng.integers(0, 256, (size, half), dtype=np.uint8)
    out = np.empty((size, size), dtype=np.uint8)
    centers = rng.uniform(0, size, (repeats, 4))
    radii = rng.uniform(5, 18, repeats)

    start = time.perf_counter()
    for i in range(repeats):
        cx1, cy1, cx2, cy2 = centers[i]
        fn(out, bg_left, bg_right, mask, cx1, cy1, cx2, cy2, radii[i], 30, 40)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=2000)
    parser.add_argument("--size", type=int, default=160)
    args = parser.parse_args()

    backends = available_backends()
    results = {}
    for name, fn in sorted(backends.items()):
        bench(fn, args.size, 50)  # warm-up
        elapsed = bench(fn, args.size, args.repeats)
        results[name] = elapsed
        rate = args.repeats / elapsed
        print(f"{name:>8}: {elapsed:.3f} s for {args.repeats} renders "
              f"({rate:,.0f}/s, {1e6 * elapsed / args.repeats:.0f} us each)")
    if {"python", "native"} <= results.keys():
        print(f"speedup: {results['python'] / results['native']:.1f}x")


if __name__ == "__main__":
    main()
