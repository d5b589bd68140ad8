"""Dual-mask control: inner-mask tracking, adaptive dilation and ring softening."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .core import as_flow, as_frame, as_mask, check_same_size, sample_field, to_grayscale, warp_field
from .flow import FlowParams, estimate_flow

SOFTENING_MODES = ("motion", "distance", "none")


@dataclass(frozen=True)
class DilationSpec:
    gamma: float = 1.0 / 15.0
    min_radius: int = 1

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError("gamma must be > 0")
        if self.min_radius < 0:
            raise ValueError("min_radius must be >= 0")

    def radius(self, d_min: float) -> int:
        """floor(gamma * d_min), lifted to ``min_radius``."""
        # tolerate float noise like 30 * (1/15) = 1.9999999999999998
        return max(self.min_radius, int(math.floor(self.gamma * d_min + 1e-9)))


@dataclass(frozen=True)
class SofteningSpec:
    mode: str = "distance"
    beta: float = 1.0
    epsilon: float = 1e-3

    def __post_init__(self):
        if self.mode not in SOFTENING_MODES:
            raise ValueError(f"softening mode must be one of {SOFTENING_MODES}, got {self.mode!r}")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")


def distance_outside(inner) -> np.ndarray:
    """Exact Euclidean distance from each pixel to the nearest inner pixel."""
    m = as_mask(inner)
    if not m.any():
        raise ValueError("distance transform of an empty mask")
    return np.sqrt(_kernels.edt_sq(m))


def dilate(mask, r: float) -> np.ndarray:
    """Minkowski dilation by the discrete disc {d : |d| <= r}."""
    m = as_mask(mask)
    if r < 0:
        raise ValueError("dilation radius must be >= 0")
    if r == 0 or not m.any():
        return m.copy()
    return _kernels.edt_sq(m) <= r * r


def erode(mask, r: float) -> np.ndarray:
    """Erosion by the same disc; pixels beyond the border count as set."""
    m = as_mask(mask)
    if r == 0 or m.all():
        return m.copy()
    return ~dilate(~m, r)


def close(mask, r: float = 1) -> np.ndarray:
    return erode(dilate(mask, r), r)


def boundary(mask) -> np.ndarray:
    """Set pixels with at least one unset 4-neighbour (outside counts as unset)."""
    m = as_mask(mask)
    p = np.pad(m, 1, constant_values=False)
    interior = p[:-2, 1:-1] & p[2:, 1:-1] & p[1:-1, :-2] & p[1:-1, 2:]
    return m & ~interior


def centroid(mask) -> tuple[float, float]:
    m = as_mask(mask)
    ys, xs = np.nonzero(m)
    if xs.size == 0:
        raise ValueError("centroid of an empty mask")
    return float(xs.mean()), float(ys.mean())


def boundary_cracks(mask) -> np.ndarray:
    """Midpoints of the pixel edges separating set pixels from unset 4-neighbours.

    Returns an (n, 2) array of (x, y). Edges on the image border count.
    """
    m = as_mask(mask)
    p = np.pad(m, 1, constant_values=False)
    pts = []
    for dx, dy in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        nb = p[1 + dy:p.shape[0] - 1 + dy, 1 + dx:p.shape[1] - 1 + dx]
        ys, xs = np.nonzero(m & ~nb)
        pts.append(np.stack([xs + 0.5 * dx, ys + 0.5 * dy], axis=1))
    return np.concatenate(pts)


def min_centroid_boundary_distance(mask) -> float:
    """Distance from the mask centroid to the closest boundary crack."""
    m = as_mask(mask)
    if not m.any():
        raise ValueError("d_min of an empty mask")
    cx, cy = centroid(m)
    pts = boundary_cracks(m)
    return float(np.min(np.hypot(pts[:, 0] - cx, pts[:, 1] - cy)))


def dilation_radius(inner, spec: DilationSpec | None = None) -> int:
    spec = spec or DilationSpec()
    return spec.radius(min_centroid_boundary_distance(inner))


def residual_gate(ref: np.ndarray, cur: np.ndarray, flow: np.ndarray, radius: int, threshold: float) -> np.ndarray:
    """Pixels whose window-mean photometric residual after warping is acceptable.

    Where the warped reference fails to explain the current frame (occluder
    onset or removal, smoke) the flow is not trusted.
    """
    resid = np.abs(warp_field(ref, flow) - cur)
    resid = ndimage.uniform_filter(resid, 2 * radius + 1, mode="nearest")
    return resid <= threshold


def texture_gate(img: np.ndarray, radius: int, min_energy: float, sigma: float = 1.0) -> np.ndarray:
    """Pixels whose window-mean squared gradient reaches ``min_energy``.

    Flat regions (a uniform occluder) carry no motion information; the flow
    estimator returns arbitrary vectors there.
    """
    g = ndimage.gaussian_filter(img, sigma, mode="nearest")
    p = np.pad(g, 1, mode="edge")
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return ndimage.uniform_filter(gx * gx + gy * gy, 2 * radius + 1, mode="nearest") >= min_energy


def propagate_mask(mask_prev, frame_prev, frame_cur, params: FlowParams | None = None,
                   gate: float | None = 0.08, min_texture: float | None = 1e-5,
                   fb_tolerance: float | None = 1.0) -> np.ndarray:
    """Carry ``mask_prev`` onto ``frame_cur`` by flow-chained backward sampling.

    The flow is estimated on the current grid into the previous frame, the
    0/1 mask is sampled along it and thresholded at 0.5, then closed with a
    radius-1 disc. With ``gate`` set, flow vectors failing the photometric
    residual check are zeroed so the mask holds its place. With
    ``min_texture`` set, so are vectors at pixels that are flat in either
    frame. With ``fb_tolerance`` set, vectors that the reverse flow does not
    bring back to within that many pixels are zeroed too. All three checks
    target occluder onset and removal, where the raw flow is meaningless.
    """
    params = params or FlowParams()
    m = as_mask(mask_prev)
    prev = as_frame(frame_prev)
    cur = as_frame(frame_cur)
    check_same_size(m, prev, cur)
    if not m.any():
        return m.copy()
    flow = estimate_flow(prev, cur, params)
    if gate is not None:
        g_prev = to_grayscale(prev)[:, :, 0]
        g_cur = to_grayscale(cur)[:, :, 0]
        ok = residual_gate(g_prev, g_cur, flow, params.window_radius, gate)
        flow = flow * ok[..., None]
    if min_texture is not None:
        g_prev = to_grayscale(prev)[:, :, 0]
        g_cur = to_grayscale(cur)[:, :, 0]
        r = params.window_radius
        ok = texture_gate(g_prev, r, min_texture) & texture_gate(g_cur, r, min_texture)
        flow = flow * ok[..., None]
    if fb_tolerance is not None:
        back = estimate_flow(cur, prev, params)
        loop = flow + warp_field(back, flow)
        flow = flow * (np.hypot(loop[..., 0], loop[..., 1]) <= fb_tolerance)[..., None]
    moved = warp_field(m.astype(np.float64), flow) >= 0.5
    return close(moved, 1)


def ring(inner, dilated) -> np.ndarray:
    return as_mask(dilated) & ~as_mask(inner)


def soften_distance(inner, dilated, spec: SofteningSpec | None = None, radius: float | None = None) -> np.ndarray:
    """exp(-beta * d / r) on the ring, zero elsewhere.

    ``radius`` is the dilation radius used to normalize distances; when
    omitted it is recovered as the largest ring distance.
    """
    spec = spec or SofteningSpec()
    inner = as_mask(inner)
    dilated = as_mask(dilated)
    check_same_size(inner, dilated)
    out = np.zeros(inner.shape)
    rg = dilated & ~inner
    if not rg.any() or not inner.any():
        return out
    d = distance_outside(inner)
    r_norm = float(radius) if radius is not None else float(np.ceil(d[rg].max()))
    if r_norm <= 0:
        return out
    out[rg] = np.exp(-spec.beta * d[rg] / r_norm)
    return out


def soften_motion(inner, dilated, ring_flow, spec: SofteningSpec | None = None) -> np.ndarray:
    """Flow magnitude on the ring normalized by its ring maximum.

    Below ``spec.epsilon`` the ring is considered static and all weights are 0.
    """
    spec = spec or SofteningSpec(mode="motion")
    inner = as_mask(inner)
    dilated = as_mask(dilated)
    fl = as_flow(ring_flow)
    check_same_size(inner, dilated, fl)
    out = np.zeros(inner.shape)
    rg = dilated & ~inner
    if not rg.any():
        return out
    mag = np.hypot(fl[..., 0], fl[..., 1])
    peak = float(mag[rg].max())
    if peak < spec.epsilon or peak == 0.0:
        return out
    out[rg] = mag[rg] / peak
    return out


def soften_uniform(inner, dilated) -> np.ndarray:
    rg = ring(inner, dilated)
    return rg.astype(np.float64)


def unified_map(inner, dilated, ring_weights) -> np.ndarray:
    """1 on the inner mask, the ring weight on the ring, 0 elsewhere."""
    inner = as_mask(inner)
    dilated = as_mask(dilated) | inner
    w = np.asarray(ring_weights, dtype=np.float64)
    check_same_size(inner, dilated, w)
    out = np.where(dilated & ~inner, np.clip(w, 0.0, 1.0), 0.0)
    out[inner] = 1.0
    return out


def build_map(inner, spec_dilation: DilationSpec, spec_soft: SofteningSpec, flow=None):
    """Full ring pipeline for one frame.

    Returns ``(map, radius, ring_max_flow)``; ``flow`` is required in motion
    mode. An empty inner mask yields an all-zero map and radius 0.
    """
    inner = as_mask(inner)
    if not inner.any():
        return np.zeros(inner.shape), 0, None
    r = dilation_radius(inner, spec_dilation)
    dil = dilate(inner, r)
    ring_max = None
    if spec_soft.mode == "distance":
        w = soften_distance(inner, dil, spec_soft, radius=r)
    elif spec_soft.mode == "motion":
        if flow is None:
            raise ValueError("motion softening needs a flow field")
        w = soften_motion(inner, dil, flow, spec_soft)
        rg = dil & ~inner
        if rg.any():
            ring_max = float(np.hypot(flow[..., 0], flow[..., 1])[rg].max())
    else:
        w = soften_uniform(inner, dil)
    return unified_map(inner, dil, w), r, ring_max
