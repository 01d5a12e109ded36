# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: forward geometric pixel scatter and box stencils.

The pure-numpy twin of this module is ``_kernels_py``; both must produce
bit-identical output for identical arguments (enforced by tests).
"""
import numpy as np

from libc.math cimport floor


def geometric_apply(const unsigned char[:, :, ::1] img,
                    double a11, double a12, double a21, double a22,
                    double cx, double cy, double bx, double by):
    """Forward-map every source pixel through the affine map

        x = a11*(i-cx) + a12*(j-cy) + bx
        y = a21*(i-cx) + a22*(j-cy) + by

    then round half-up to the destination cell.  Unwritten cells stay 0,
    conflicts resolve to the last writer in row-major source order.
    """
    cdef Py_ssize_t H = img.shape[0]
    cdef Py_ssize_t W = img.shape[1]
    cdef Py_ssize_t C = img.shape[2]
    out_arr = np.zeros((H, W, C), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, ch, di, dj
    cdef double u, v, x, y, xf, yf
    for j in range(H):
        for i in range(W):
            u = i - cx
            v = j - cy
            x = a11 * u + a12 * v + bx
            y = a21 * u + a22 * v + by
            xf = floor(x + 0.5)
            yf = floor(y + 0.5)
            if 0.0 <= xf and xf < W and 0.0 <= yf and yf < H:
                di = <Py_ssize_t> xf
                dj = <Py_ssize_t> yf
                for ch in range(C):
                    out[dj, di, ch] = img[j, i, ch]
    return out_arr


def box_filter(const unsigned char[:, :, ::1] img, int c, int op):
    """c-by-c box stencil with replicate-edge padding.

    op: 0 mean (round half-up), 1 median (odd c only), 2 min, 3 max.
    The window spans offsets [-(c//2), c - c//2) on both axes.
    """
    cdef Py_ssize_t H = img.shape[0]
    cdef Py_ssize_t W = img.shape[1]
    cdef Py_ssize_t C = img.shape[2]
    out_arr = np.empty((H, W, C), dtype=np.uint8)
    cdef unsigned char[:, :, ::1] out = out_arr
    cdef int lo = -(c // 2)
    cdef int hi = c - c // 2          # exclusive
    cdef long cnt = <long> c * c
    cdef long target = cnt // 2       # 0-based middle rank for odd windows
    cdef Py_ssize_t i, j, ch, k, l, sk, sl
    cdef long s, acc
    cdef int mn, mx, val, b
    cdef long hist[256]
    for ch in range(C):
        for j in range(H):
            for i in range(W):
                if op == 0:
                    s = 0
                    for l in range(j + lo, j + hi):
                        sl = 0 if l < 0 else (H - 1 if l >= H else l)
                        for k in range(i + lo, i + hi):
                            sk = 0 if k < 0 else (W - 1 if k >= W else k)
                            s += img[sl, sk, ch]
                    out[j, i, ch] = <unsigned char> ((2 * s + cnt) // (2 * cnt))
                elif op == 1:
                    for b in range(256):
                        hist[b] = 0
                    for l in range(j + lo, j + hi):
                        sl = 0 if l < 0 else (H - 1 if l >= H else l)
                        for k in range(i + lo, i + hi):
                            sk = 0 if k < 0 else (W - 1 if k >= W else k)
                            hist[img[sl, sk, ch]] += 1
                    acc = 0
                    val = 0
                    for b in range(256):
                        acc += hist[b]
                        if acc > target:
                            val = b
                            break
                    out[j, i, ch] = <unsigned char> val
                elif op == 2:
                    mn = 255
                    for l in range(j + lo, j + hi):
                        sl = 0 if l < 0 else (H - 1 if l >= H else l)
                        for k in range(i + lo, i + hi):
                            sk = 0 if k < 0 else (W - 1 if k >= W else k)
                            if img[sl, sk, ch] < mn:
                                mn = img[sl, sk, ch]
                    out[j, i, ch] = <unsigned char> mn
                else:
                    mx = 0
                    for l in range(j + lo, j + hi):
                        sl = 0 if l < 0 else (H - 1 if l >= H else l)
                        for k in range(i + lo, i + hi):
                            sk = 0 if k < 0 else (W - 1 if k >= W else k)
                            if img[sl, sk, ch] > mx:
                                mx = img[sl, sk, ch]
                    out[j, i, ch] = <unsigned char> mx
    return out_arr
