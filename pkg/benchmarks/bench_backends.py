#!/usr/bin/env python3
"""Time the hot kernels under each available backend.

Every dispatched kernel has a compiled path and a pure-numpy path that
produce bit-identical results; this script measures what the compiled
path buys on realistic workloads.

    python3 benchmarks/bench_backends.py [--size 128] [--repeats 5]
"""

import argparse
import time

import numpy as np

from accelstream import backend
from accelstream.flow import estimate_block_matching, estimate_horn_schunck
from accelstream.kernels import box_downsample2, resize_bilinear, warp_bilinear
from accelstream.synth import MotionSpec, generate


def best_of(fn, repeats):
    fn()  # warm-up: JIT compilation, allocator, caches
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def build_cases(size):
    spec = MotionSpec("random-texture", (1.2, 0.6), (0.0, 0.0),
                      n_frames=12, width=size, height=size, seed=0)
    seq, _ = generate(spec)
    prev, nxt = seq[0], seq[1]
    rng = np.random.default_rng(1)
    img = rng.random((size, size))
    u = rng.normal(0, 1.5, (size, size))
    v = rng.normal(0, 1.5, (size, size))

    return [
        (f"render 12-frame {size}x{size} video", lambda: generate(spec)),
        (f"dense flow, one {size}x{size} pair",
         lambda: estimate_horn_schunck(prev, nxt)),
        ("block matching, radius 4 block 5",
         lambda: estimate_block_matching(prev, nxt, radius=4, block=5)),
        (f"bilinear warp {size}x{size}", lambda: warp_bilinear(img, u, v)),
        (f"bilinear resize to {2 * size}x{2 * size}",
         lambda: resize_bilinear(img, 2 * size, 2 * size)),
        ("2x box downsample", lambda: box_downsample2(img)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=128,
                    help="frame side length in pixels (default 128)")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timed repetitions per case; best is kept (default 5)")
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if backend.HAVE_NUMBA else [])
    original = backend.current_backend()
    results = {}
    try:
        for b in backends:
            backend.set_backend(b)
            for name, fn in build_cases(args.size):
                results.setdefault(name, {})[b] = best_of(fn, args.repeats)
    finally:
        backend.set_backend(original)

    if not backend.HAVE_NUMBA:
        print("numba unavailable; timing the numpy path only\n")
    width = max(len(name) for name in results) + 2
    header = f"{'case':<{width}}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for name, times in results.items():
        row = f"{name:<{width}}"
        for b in backends:
            row += f"{times[b] * 1e3:>10.2f}ms"
        if len(backends) == 2:
            row += f"{times['numpy'] / times['numba']:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
