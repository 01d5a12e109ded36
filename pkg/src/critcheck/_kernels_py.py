"""Pure-numpy fallback for the compiled kernels.

Must stay bit-identical to ``_kernels.pyx`` output: same arithmetic, same
evaluation order, same rounding.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _grids(W: int, H: int):
    jj, ii = np.meshgrid(np.arange(H, dtype=np.float64),
                         np.arange(W, dtype=np.float64), indexing="ij")
    ii.setflags(write=False)
    jj.setflags(write=False)
    return ii, jj


def geometric_apply(img, a11, a12, a21, a22, cx, cy, bx, by):
    H, W, C = img.shape
    ii, jj = _grids(W, H)
    u = ii - cx
    v = jj - cy
    x = a11 * u + a12 * v + bx
    y = a21 * u + a22 * v + by
    di = np.floor(x + 0.5)
    dj = np.floor(y + 0.5)
    valid = (di >= 0) & (di < W) & (dj >= 0) & (dj < H)
    out = np.zeros((H, W, C), dtype=np.uint8)
    flat = (dj[valid].astype(np.int64) * W + di[valid].astype(np.int64))
    src = img.reshape(H * W, C)[valid.ravel()]
    # last writer in row-major source order: reverse, keep first occurrence
    rev_flat = flat[::-1]
    uniq, first = np.unique(rev_flat, return_index=True)
    out.reshape(H * W, C)[uniq] = src[::-1][first]
    return out


def box_filter(img, c, op):
    H, W, C = img.shape
    lo = c // 2
    hi = c - c // 2 - 1
    padded = np.pad(img, ((lo, hi), (lo, hi), (0, 0)), mode="edge")
    win = np.lib.stride_tricks.sliding_window_view(padded, (c, c), axis=(0, 1))
    if op == 0:
        s = win.sum(axis=(-2, -1), dtype=np.int64)
        cnt = c * c
        return ((2 * s + cnt) // (2 * cnt)).astype(np.uint8)
    if op == 1:
        return np.median(win, axis=(-2, -1)).astype(np.uint8)
    if op == 2:
        return win.min(axis=(-2, -1))
    return win.max(axis=(-2, -1))
