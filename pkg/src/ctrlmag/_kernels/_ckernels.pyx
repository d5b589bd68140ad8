# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels, same signatures as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport floor, INFINITY

cnp.import_array()


def sample_bilinear(double[:, :, ::1] img, double[:, ::1] xs, double[:, ::1] ys):
    cdef Py_ssize_t h = img.shape[0], w = img.shape[1], nc = img.shape[2]
    cdef Py_ssize_t oh = xs.shape[0], ow = xs.shape[1]
    out_arr = np.empty((oh, ow, nc), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t i, j, k, x0, y0, x1, y1
    cdef double x, y, fx, fy, top, bot
    with nogil:
        for i in range(oh):
            for j in range(ow):
                x = xs[i, j]
                y = ys[i, j]
                if x < 0.0:
                    x = 0.0
                elif x > w - 1.0:
                    x = w - 1.0
                if y < 0.0:
                    y = 0.0
                elif y > h - 1.0:
                    y = h - 1.0
                x0 = <Py_ssize_t>floor(x)
                y0 = <Py_ssize_t>floor(y)
                x1 = x0 + 1 if x0 + 1 < w else w - 1
                y1 = y0 + 1 if y0 + 1 < h else h - 1
                fx = x - x0
                fy = y - y0
                for k in range(nc):
                    top = img[y0, x0, k] * (1.0 - fx) + img[y0, x1, k] * fx
                    bot = img[y1, x0, k] * (1.0 - fx) + img[y1, x1, k] * fx
                    out[i, j, k] = top * (1.0 - fy) + bot * fy
    return out_arr


cdef void _box_sum(double[:, ::1] a, Py_ssize_t r, double[:, ::1] sat,
                   double[:, ::1] out) noexcept nogil:
    # summed-area table over the clamp-padded image; sat is (h+2r+1, w+2r+1)
    cdef Py_ssize_t h = a.shape[0], w = a.shape[1]
    cdef Py_ssize_t ph = h + 2 * r, pw = w + 2 * r
    cdef Py_ssize_t i, j, si, sj, k = 2 * r + 1
    cdef double row
    for j in range(pw + 1):
        sat[0, j] = 0.0
    for i in range(ph):
        si = i - r
        if si < 0:
            si = 0
        elif si > h - 1:
            si = h - 1
        sat[i + 1, 0] = 0.0
        row = 0.0
        for j in range(pw):
            sj = j - r
            if sj < 0:
                sj = 0
            elif sj > w - 1:
                sj = w - 1
            row = row + a[si, sj]
            sat[i + 1, j + 1] = sat[i, j + 1] + row
    for i in range(h):
        for j in range(w):
            out[i, j] = sat[i + k, j + k] - sat[i, j + k] - sat[i + k, j] + sat[i, j]


def lk_solve(gx_in, gy_in, gt_in, Py_ssize_t radius, double reg, double min_trace):
    cdef double[:, ::1] gx = np.ascontiguousarray(gx_in, dtype=np.float64)
    cdef double[:, ::1] gy = np.ascontiguousarray(gy_in, dtype=np.float64)
    cdef double[:, ::1] gt = np.ascontiguousarray(gt_in, dtype=np.float64)
    cdef Py_ssize_t h = gx.shape[0], w = gx.shape[1], i, j, n
    prods_arr = np.empty((5, h, w), dtype=np.float64)
    sums_arr = np.empty((5, h, w), dtype=np.float64)
    cdef double[:, :, ::1] prods = prods_arr
    cdef double[:, :, ::1] sums = sums_arr
    sat_arr = np.empty((h + 2 * radius + 1, w + 2 * radius + 1), dtype=np.float64)
    cdef double[:, ::1] sat = sat_arr
    u_arr = np.zeros((h, w), dtype=np.float64)
    v_arr = np.zeros((h, w), dtype=np.float64)
    cdef double[:, ::1] u = u_arr
    cdef double[:, ::1] v = v_arr
    cdef double a, b, c, p, q, det
    with nogil:
        for i in range(h):
            for j in range(w):
                prods[0, i, j] = gx[i, j] * gx[i, j]
                prods[1, i, j] = gx[i, j] * gy[i, j]
                prods[2, i, j] = gy[i, j] * gy[i, j]
                prods[3, i, j] = gx[i, j] * gt[i, j]
                prods[4, i, j] = gy[i, j] * gt[i, j]
        for n in range(5):
            _box_sum(prods[n], radius, sat, sums[n])
        for i in range(h):
            for j in range(w):
                a = sums[0, i, j]
                b = sums[1, i, j]
                c = sums[2, i, j]
                if a + c < min_trace:
                    continue
                p = sums[3, i, j]
                q = sums[4, i, j]
                a = a + reg
                c = c + reg
                det = a * c - b * b
                if det <= 0.0:
                    continue
                u[i, j] = (c * p - b * q) / det
                v[i, j] = (a * q - b * p) / det
    return u_arr, v_arr


cdef void _envelope_1d(double* f, Py_ssize_t n, double* d, Py_ssize_t* vtx,
                       double* z) noexcept nogil:
    # lower envelope of parabolas (Felzenszwalb & Huttenlocher); f may hold INFINITY
    cdef Py_ssize_t k = -1, q, j
    cdef double s
    for q in range(n):
        if f[q] == INFINITY:
            continue
        while True:
            if k < 0:
                k = 0
                vtx[0] = q
                z[0] = -INFINITY
                z[1] = INFINITY
                break
            s = ((f[q] + q * q) - (f[vtx[k]] + vtx[k] * vtx[k])) / (2.0 * q - 2.0 * vtx[k])
            if s <= z[k]:
                k -= 1
                continue
            k += 1
            vtx[k] = q
            z[k] = s
            z[k + 1] = INFINITY
            break
    if k < 0:
        for q in range(n):
            d[q] = INFINITY
        return
    j = 0
    for q in range(n):
        while z[j + 1] < q:
            j += 1
        d[q] = (q - vtx[j]) * (q - vtx[j]) + f[vtx[j]]


def edt_sq(mask_in):
    mask_u8 = np.ascontiguousarray(mask_in, dtype=np.uint8)
    cdef unsigned char[:, ::1] mask = mask_u8
    cdef Py_ssize_t h = mask.shape[0], w = mask.shape[1], i, j
    cdef Py_ssize_t n = h if h > w else w
    out_arr = np.empty((h, w), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    buf_arr = np.empty(4 * n + 2, dtype=np.float64)
    vtx_arr = np.empty(n, dtype=np.intp)
    cdef double[::1] buf = buf_arr
    cdef Py_ssize_t[::1] vtx = vtx_arr
    cdef double* f = &buf[0]
    cdef double* d = &buf[n]
    cdef double* z = &buf[2 * n]
    with nogil:
        for j in range(w):
            for i in range(h):
                f[i] = 0.0 if mask[i, j] else INFINITY
            _envelope_1d(f, h, d, &vtx[0], z)
            for i in range(h):
                out[i, j] = d[i]
        for i in range(h):
            for j in range(w):
                f[j] = out[i, j]
            _envelope_1d(f, w, d, &vtx[0], z)
            for j in range(w):
                out[i, j] = d[j]
    return out_arr


def splat_bilinear(zx_in, zy_in, values_in, Py_ssize_t h, Py_ssize_t w):
    cdef double[::1] zx = np.ascontiguousarray(zx_in, dtype=np.float64)
    cdef double[::1] zy = np.ascontiguousarray(zy_in, dtype=np.float64)
    cdef double[:, ::1] values = np.ascontiguousarray(values_in, dtype=np.float64)
    cdef Py_ssize_t n = zx.shape[0], nc = values.shape[1], i, k, x0, y0, X, Y, c
    weight_arr = np.zeros((h, w), dtype=np.float64)
    sums_arr = np.zeros((h, w, nc), dtype=np.float64)
    cdef double[:, ::1] weight = weight_arr
    cdef double[:, :, ::1] sums = sums_arr
    cdef double fx, fy, wt
    cdef int dx, dy
    with nogil:
        for i in range(n):
            x0 = <Py_ssize_t>floor(zx[i])
            y0 = <Py_ssize_t>floor(zy[i])
            fx = zx[i] - x0
            fy = zy[i] - y0
            for c in range(4):
                dx = c & 1
                dy = c >> 1
                X = x0 + dx
                Y = y0 + dy
                if X < 0 or X >= w or Y < 0 or Y >= h:
                    continue
                wt = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
                weight[Y, X] += wt
                for k in range(nc):
                    sums[Y, X, k] += wt * values[i, k]
    return weight_arr, sums_arr
