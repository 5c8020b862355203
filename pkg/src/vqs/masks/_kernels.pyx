# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled pixel kernels; mirrors _kernels_py exactly."""

import numpy as np

BACKEND = "cython"


def rle_encode_counts(flat):
    cdef const unsigned char[::1] bits = np.ascontiguousarray(flat, dtype=np.uint8)
    cdef Py_ssize_t n = bits.shape[0]
    cdef Py_ssize_t i
    cdef unsigned char cur = 0
    cdef long long run = 0
    counts = []
    for i in range(n):
        if bits[i] == cur:
            run += 1
        else:
            counts.append(run)
            cur = bits[i]
            run = 1
    counts.append(run)
    return counts


def rle_decode_fill(counts, n):
    cdef const long long[::1] c = np.ascontiguousarray(counts, dtype=np.int64)
    out = np.zeros(int(n), dtype=np.uint8)
    cdef unsigned char[::1] bits = out
    cdef Py_ssize_t k, j
    cdef Py_ssize_t pos = 0
    cdef unsigned char val = 0
    for k in range(c.shape[0]):
        if val:
            for j in range(pos, pos + c[k]):
                bits[j] = 1
        pos += c[k]
        val = 1 - val
    return out


def iou_counts(a, b):
    cdef const unsigned char[::1] aa = np.ascontiguousarray(a, dtype=np.uint8)
    cdef const unsigned char[::1] bb = np.ascontiguousarray(b, dtype=np.uint8)
    cdef Py_ssize_t i
    cdef long long inter = 0, uni = 0
    # branchless; bits are guaranteed 0/1
    for i in range(aa.shape[0]):
        inter += aa[i] & bb[i]
        uni += aa[i] | bb[i]
    return inter, uni


def downsample_fractions(mask, g):
    cdef const unsigned char[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0], w = m.shape[1]
    cdef Py_ssize_t gg = g
    out = np.zeros((gg, gg), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j, r, c, r0, r1, c0, c1
    cdef long long cnt, area
    for i in range(gg):
        r0 = (i * h) // gg
        r1 = ((i + 1) * h) // gg
        for j in range(gg):
            c0 = (j * w) // gg
            c1 = ((j + 1) * w) // gg
            cnt = 0
            for r in range(r0, r1):
                for c in range(c0, c1):
                    if m[r, c]:
                        cnt += 1
            area = (r1 - r0) * (c1 - c0)
            o[i, j] = (<double>cnt / <double>area) if area > 0 else 0.0
    return out


def aggregate_soft(masks, weights):
    cdef const unsigned char[:, ::1] m = np.ascontiguousarray(masks, dtype=np.uint8)
    cdef const double[::1] wts = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0], p = m.shape[1]
    out = np.zeros(p, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i, k
    cdef double wi
    for i in range(n):
        wi = wts[i]
        if wi == 0.0:
            continue
        for k in range(p):
            if m[i, k]:
                o[k] += wi
    return out


def polygon_inside(px, py, vx, vy):
    cdef const double[::1] xs = np.ascontiguousarray(px, dtype=np.float64)
    cdef const double[::1] ys = np.ascontiguousarray(py, dtype=np.float64)
    cdef const double[::1] pvx = np.ascontiguousarray(vx, dtype=np.float64)
    cdef const double[::1] pvy = np.ascontiguousarray(vy, dtype=np.float64)
    cdef Py_ssize_t npts = xs.shape[0], nv = pvx.shape[0]
    out = np.zeros(npts, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    cdef Py_ssize_t k, i, j
    cdef double x, y, xint
    cdef unsigned char inside
    for k in range(npts):
        x = xs[k]
        y = ys[k]
        inside = 0
        j = nv - 1
        for i in range(nv):
            if (pvy[i] > y) != (pvy[j] > y):
                xint = (pvx[j] - pvx[i]) * (y - pvy[i]) / (pvy[j] - pvy[i]) + pvx[i]
                if x < xint:
                    inside = 1 - inside
            j = i
        o[k] = inside
    return out
