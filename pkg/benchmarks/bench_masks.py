#!/usr/bin/env python3
"""Benchmark the compiled mask kernels against the NumPy fallback.

Usage: python3 benchmarks/bench_masks.py [--side 480] [--repeats 30]
"""

import argparse
import sys
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vqs.masks import _kernels_py as kp  # noqa: E402

try:
    from vqs.masks import _kernels as kc
except ImportError:
    kc = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--side", type=int, default=480, help="mask side length")
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    side = args.side
    mask = (rng.random((side, side)) < 0.4)
    flat = np.ascontiguousarray(mask.T.reshape(-1), dtype=np.uint8)
    counts = np.asarray(kp.rle_encode_counts(flat), dtype=np.int64)
    other = np.ascontiguousarray((rng.random(side * side) < 0.4), dtype=np.uint8)
    mask_u8 = np.ascontiguousarray(mask, dtype=np.uint8)
    stack = np.ascontiguousarray(rng.random((25, side * side)) < 0.3, dtype=np.uint8)
    weights = rng.dirichlet(np.ones(25))
    poly_x = rng.random(8) * side
    poly_y = rng.random(8) * side
    px = (np.arange(side * side) % side).astype(np.float64) + 0.5
    py = (np.arange(side * side) // side).astype(np.float64) + 0.5

    cases = {
        f"rle_encode      {side}x{side}": lambda k: k.rle_encode_counts(flat),
        f"rle_decode      {side}x{side}": lambda k: k.rle_decode_fill(counts, side * side),
        f"iou_counts      {side}x{side}": lambda k: k.iou_counts(flat, other),
        f"downsample g=14 {side}x{side}": lambda k: k.downsample_fractions(mask_u8, 14),
        f"aggregate  N=25 {side}x{side}": lambda k: k.aggregate_soft(stack, weights),
        f"polygon 8v      {side}x{side}": lambda k: k.polygon_inside(px, py, poly_x, poly_y),
    }

    if kc is None:
        print("compiled backend unavailable; timing the NumPy fallback only\n")
    header = f"{'kernel':<28} {'numpy':>10} {'cython':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in cases.items():
        t_py = timeit(lambda: call(kp), args.repeats)
        if kc is not None:
            t_cy = timeit(lambda: call(kc), args.repeats)
            print(f"{name:<28} {t_py * 1e3:>8.3f}ms {t_cy * 1e3:>8.3f}ms {t_py / t_cy:>7.1f}x")
        else:
            print(f"{name:<28} {t_py * 1e3:>8.3f}ms {'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
