"""Dense coarse-to-fine optical flow by pyramidal windowed least squares.

The estimated field ``F`` lives on the grid of ``cur`` and points into
``ref``: ``ref(x + F(x)) ~= cur(x)``. Magnification can then backward-sample
the reference directly without inverting the field.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import _kernels
from .core import as_flow, as_frame, check_same_size, pixel_grid, sample_field, to_grayscale, warp_field

REGULARIZATION = 1e-4
# Normal matrices with a smaller trace are treated as textureless (zero update).
MIN_TRACE = 1e-9
MIN_LEVEL_SIZE = 8


@dataclass(frozen=True)
class FlowParams:
    pyramid_levels: int = 4
    window_radius: int = 7
    refinement_iterations: int = 3
    presmooth_sigma: float = 1.0

    def __post_init__(self):
        if self.pyramid_levels < 1:
            raise ValueError("pyramid_levels must be >= 1")
        if self.window_radius < 1:
            raise ValueError("window_radius must be >= 1")
        if self.refinement_iterations < 1:
            raise ValueError("refinement_iterations must be >= 1")
        if self.presmooth_sigma < 0:
            raise ValueError("presmooth_sigma must be >= 0")


def _smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    if sigma <= 0:
        return img
    return ndimage.gaussian_filter(img, sigma, mode="nearest")


def _pyramid(img: np.ndarray, levels: int) -> list[np.ndarray]:
    pyr = [img]
    while len(pyr) < levels and min(pyr[-1].shape) >= 2 * MIN_LEVEL_SIZE:
        pyr.append(_smooth(pyr[-1], 1.0)[::2, ::2].copy())
    return pyr


def _gradients(img: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # central differences, clamp-to-edge
    p = np.pad(img, 1, mode="edge")
    gx = 0.5 * (p[1:-1, 2:] - p[1:-1, :-2])
    gy = 0.5 * (p[2:, 1:-1] - p[:-2, 1:-1])
    return gx, gy


def _upsample_flow(flow: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    # coarse pixel x sits at fine pixel 2x
    xs, ys = pixel_grid(*shape)
    return 2.0 * sample_field(flow, 0.5 * xs, 0.5 * ys)


def lk_refine(ref: np.ndarray, cur: np.ndarray, flow: np.ndarray, params: FlowParams) -> np.ndarray:
    """Run the configured number of warp-and-solve refinements at one level."""
    flow = flow.copy()
    for _ in range(params.refinement_iterations):
        ref_w = warp_field(ref, flow)
        gx, gy = _gradients(0.5 * (ref_w + cur))
        du, dv = _kernels.lk_solve(gx, gy, cur - ref_w, params.window_radius, REGULARIZATION, MIN_TRACE)
        # the raw window solve amplifies some error frequencies across
        # iterations; smoothing the update with the same window keeps it stable
        du = ndimage.uniform_filter(du, 2 * params.window_radius + 1, mode="nearest")
        dv = ndimage.uniform_filter(dv, 2 * params.window_radius + 1, mode="nearest")
        flow[..., 0] += du
        flow[..., 1] += dv
    return flow


def estimate_flow(ref, cur, params: FlowParams | None = None) -> np.ndarray:
    """Estimate the (H, W, 2) field F with ref(x + F(x)) ~= cur(x)."""
    params = params or FlowParams()
    r = as_frame(ref)
    c = as_frame(cur)
    check_same_size(r, c)
    r = _smooth(to_grayscale(r)[:, :, 0], params.presmooth_sigma)
    c = _smooth(to_grayscale(c)[:, :, 0], params.presmooth_sigma)
    pyr_r = _pyramid(r, params.pyramid_levels)
    pyr_c = _pyramid(c, params.pyramid_levels)
    flow = np.zeros(pyr_r[-1].shape + (2,))
    for level in range(len(pyr_r) - 1, -1, -1):
        if flow.shape[:2] != pyr_r[level].shape:
            flow = _upsample_flow(flow, pyr_r[level].shape)
        flow = lk_refine(pyr_r[level], pyr_c[level], flow, params)
    return flow


def flow_magnitude(flow) -> np.ndarray:
    fl = as_flow(flow)
    return np.hypot(fl[..., 0], fl[..., 1])


def endpoint_error(flow, truth, region=None) -> dict:
    """Mean and max per-pixel Euclidean distance between two fields.

    ``region`` optionally restricts the aggregation to a boolean mask.
    """
    a = as_flow(flow)
    b = as_flow(truth)
    check_same_size(a, b)
    err = np.hypot(a[..., 0] - b[..., 0], a[..., 1] - b[..., 1])
    if region is not None:
        err = err[np.asarray(region, dtype=bool)]
    return {"mean": float(err.mean()), "max": float(err.max())}


def central_region(shape, fraction: float = 0.8) -> np.ndarray:
    """Boolean mask of the centered box covering ``fraction`` of each side."""
    h, w = shape[:2]
    mh = int(round(h * (1 - fraction) / 2))
    mw = int(round(w * (1 - fraction) / 2))
    out = np.zeros((h, w), bool)
    out[mh:h - mh, mw:w - mw] = True
    return out
