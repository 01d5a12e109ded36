#!/usr/bin/env python3
"""Benchmark: compiled kernels vs the pure-numpy fallback.

Times the two hot paths (forward geometric scatter, box stencils) plus an
end-to-end dense rotation sweep on a small image, which is the shape of the
oracle workload.

    python benchmarks/bench_kernels.py [--repeats N]
"""
import argparse
import math
import time

import numpy as np

from critcheck import _kernels_py

try:
    from critcheck import _kernels
except ImportError:
    _kernels = None


def timeit(fn, repeats):
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def rotation_coeffs(W, H, deg):
    cx, cy = (W - 1) / 2.0, (H - 1) / 2.0
    th = math.radians(deg)
    ct, st = math.cos(th), math.sin(th)
    return ct, -st, st, ct, cx, cy, cx, cy


def bench_case(name, make_fn, repeats):
    pure = timeit(make_fn(_kernels_py), repeats)
    row = f"{name:<38} pure {pure * 1e3:9.3f} ms"
    if _kernels is not None:
        comp = timeit(make_fn(_kernels), repeats)
        row += f"   compiled {comp * 1e3:9.3f} ms   speedup {pure / comp:6.1f}x"
    print(row)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    if _kernels is None:
        print("NOTE: compiled kernels unavailable; timing the fallback only")
    rng = np.random.default_rng(0)
    big = rng.integers(0, 256, size=(224, 224, 3), dtype=np.uint8)
    small = rng.integers(0, 256, size=(8, 8, 1), dtype=np.uint8)

    co_big = rotation_coeffs(224, 224, 1.37)
    co_small = rotation_coeffs(8, 8, 1.37)
    bench_case("rotate 224x224x3",
               lambda k: (lambda: k.geometric_apply(big, *co_big)),
               args.repeats)
    bench_case("rotate 8x8 x 10000 params",
               lambda k: (lambda: [k.geometric_apply(
                   small, *rotation_coeffs(8, 8, -2 + i * 4e-4))
                   for i in range(10000)]),
               args.repeats)
    for op, label in ((0, "box mean"), (1, "box median"), (2, "erosion"),
                      (3, "dilation")):
        c = 5
        bench_case(f"{label} 224x224x3 kernel {c}",
                   lambda k, op=op: (lambda: k.box_filter(big, c, op)),
                   args.repeats)

    # end-to-end oracle-shaped workload through the public API
    import critcheck
    from critcheck import ParamSpace, dense_sweep
    from critcheck.transforms import TransformSpec
    img = critcheck.Image(small)
    t0 = time.perf_counter()
    sweep = dense_sweep(img, TransformSpec("rotation"),
                        ParamSpace.reals(-30, 30), step=1e-2)
    dt = time.perf_counter() - t0
    print(f"dense rotation sweep 8x8, 6001 grid points ({critcheck.BACKEND} "
          f"backend): {dt:.2f} s, {len(sweep)} distinct images")


if __name__ == "__main__":
    main()
