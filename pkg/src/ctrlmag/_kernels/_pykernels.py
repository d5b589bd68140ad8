"""Pure numpy implementations of the hot kernels.

Used when the compiled extension is unavailable, and as the reference path
the compiled kernels are checked against.
"""
import numpy as np


def sample_bilinear(img, xs, ys):
    """Sample ``img`` (H, W, C) at absolute coordinates, clamped to the border.

    ``xs`` and ``ys`` are (H', W') arrays; returns (H', W', C) float64.
    """
    h, w = img.shape[:2]
    x = np.clip(xs, 0.0, w - 1.0)
    y = np.clip(ys, 0.0, h - 1.0)
    x0 = np.floor(x).astype(np.intp)
    y0 = np.floor(y).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = (x - x0)[..., None]
    fy = (y - y0)[..., None]
    top = img[y0, x0] * (1.0 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1.0 - fx) + img[y1, x1] * fx
    return top * (1.0 - fy) + bot * fy


def _box_sum(a, radius):
    # clamp-to-edge padding, then a summed-area table
    p = np.pad(a, radius + 1, mode="edge")
    p[0, :] = 0.0
    p[:, 0] = 0.0
    s = p.cumsum(0).cumsum(1)
    k = 2 * radius + 1
    h, w = a.shape
    return s[k:k + h, k:k + w] - s[0:h, k:k + w] - s[k:k + h, 0:w] + s[0:h, 0:w]


def lk_solve(gx, gy, gt, radius, reg, min_trace):
    """Per-pixel windowed least squares for ``gx*u + gy*v = gt``.

    Returns ``(u, v)``. Pixels whose normal matrix has trace below
    ``min_trace`` get a zero update.
    """
    a = _box_sum(gx * gx, radius)
    b = _box_sum(gx * gy, radius)
    c = _box_sum(gy * gy, radius)
    p = _box_sum(gx * gt, radius)
    q = _box_sum(gy * gt, radius)
    ok = (a + c) >= min_trace
    a = a + reg
    c = c + reg
    det = a * c - b * b
    ok &= det > 0.0
    safe = np.where(ok, det, 1.0)
    u = np.where(ok, (c * p - b * q) / safe, 0.0)
    v = np.where(ok, (a * q - b * p) / safe, 0.0)
    return u, v


def _edt_1d_sq(f):
    # squared distance along axis 0 to the nearest zero of f (f: 0 on set, inf elsewhere)
    n = f.shape[0]
    out = np.empty_like(f)
    last = np.full(f.shape[1], -np.inf)
    for i in range(n):
        last = np.where(f[i] == 0.0, i, last)
        out[i] = (i - last) ** 2
    last = np.full(f.shape[1], np.inf)
    for i in range(n - 1, -1, -1):
        last = np.where(f[i] == 0.0, i, last)
        out[i] = np.minimum(out[i], (last - i) ** 2)
    return out


def edt_sq(mask):
    """Exact squared Euclidean distance to the nearest set pixel of ``mask``.

    Column pass computes exact 1D distances; the row pass minimizes
    ``(x - x')**2 + g(x')`` by brute force over each row.
    """
    h, w = mask.shape
    f = np.where(mask, 0.0, np.inf)
    g = _edt_1d_sq(f)
    xs = np.arange(w, dtype=np.float64)
    sq = (xs[:, None] - xs[None, :]) ** 2
    out = np.empty((h, w))
    for y in range(h):
        out[y] = np.min(g[y][None, :] + sq, axis=1)
    return out


def splat_bilinear(zx, zy, values, h, w):
    """Bilinearly splat ``values`` (n, C) at points (zx, zy) onto an (h, w) grid.

    Returns ``(weight (h, w), sums (h, w, C))``; points off the grid drop out.
    """
    nc = values.shape[1]
    x0 = np.floor(zx).astype(np.intp)
    y0 = np.floor(zy).astype(np.intp)
    fx = zx - x0
    fy = zy - y0
    weight = np.zeros(h * w)
    sums = np.zeros((h * w, nc))
    for dx, dy, wt in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)),
                       (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
        X = x0 + dx
        Y = y0 + dy
        ok = (X >= 0) & (X < w) & (Y >= 0) & (Y < h)
        idx = Y[ok] * w + X[ok]
        weight += np.bincount(idx, wt[ok], h * w)
        for k in range(nc):
            sums[:, k] += np.bincount(idx, wt[ok] * values[ok, k], h * w)
    return weight.reshape(h, w), sums.reshape(h, w, nc)
