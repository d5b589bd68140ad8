"""Image, flow and mask arrays plus the sampling primitives built on them.

Conventions used throughout the package:

* a frame is a float64 array of shape (H, W, C), C in {1, 3}, values in [0, 1];
* a flow field is a float64 array of shape (H, W, 2) holding (u, v) = (dx, dy)
  in pixels;
* a binary mask is a bool array of shape (H, W);
* a magnification map is a float64 array of shape (H, W) with values in [0, 1].

Coordinates are (x, y) with x along columns. Every sampler clamps to the
border.
"""
from __future__ import annotations

import numpy as np

from . import _kernels

LUMA = np.array([0.299, 0.587, 0.114])


def as_frame(data) -> np.ndarray:
    """Validate and normalize ``data`` into an (H, W, C) float64 frame.

    2D input is treated as single channel.
    """
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"frame must be HxW, HxWx1 or HxWx3, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("frame must be non-empty")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("frame intensities must lie in [0, 1]")
    return np.ascontiguousarray(arr)


def as_flow(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValueError(f"flow must have shape (H, W, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("flow must be finite")
    return np.ascontiguousarray(arr)


def as_mask(data) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim != 2:
        raise ValueError(f"mask must be 2D, got shape {arr.shape}")
    return np.ascontiguousarray(arr.astype(bool))


def check_same_size(*arrays) -> None:
    shapes = {a.shape[:2] for a in arrays}
    if len(shapes) != 1:
        raise ValueError(f"dimension mismatch: {sorted(shapes)}")


def bilinear_sample(frame, x: float, y: float) -> np.ndarray:
    """Per-channel value of ``frame`` at continuous position (x, y)."""
    img = as_frame(frame)
    out = _kernels.sample_bilinear(img, np.array([[float(x)]]), np.array([[float(y)]]))
    return out[0, 0]


def sample_field(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Vectorized clamped bilinear sampling of a 2D or 3D array.

    Returns an array with the shape of ``xs`` (plus the channel axis if
    ``img`` has one). No range checks; internal plumbing.
    """
    flat = img.ndim == 2
    src = np.ascontiguousarray(img[:, :, None] if flat else img, dtype=np.float64)
    out = _kernels.sample_bilinear(
        src,
        np.ascontiguousarray(xs, dtype=np.float64),
        np.ascontiguousarray(ys, dtype=np.float64),
    )
    return out[:, :, 0] if flat else out


def pixel_grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    return xs, ys


def warp_field(img: np.ndarray, flow: np.ndarray) -> np.ndarray:
    """out(x) = img(x + flow(x)) for a 2D or 3D array, without validation."""
    xs, ys = pixel_grid(*flow.shape[:2])
    return sample_field(img, xs + flow[..., 0], ys + flow[..., 1])


def warp_backward(frame, flow) -> np.ndarray:
    """Backward-warp ``frame``: out(x) = frame(x + flow(x)), bilinear, clamped."""
    img = as_frame(frame)
    fl = as_flow(flow)
    check_same_size(img, fl)
    return warp_field(img, fl)


def to_grayscale(frame) -> np.ndarray:
    """Single-channel luminance (Rec. 601 weights); 1-channel input passes through."""
    img = as_frame(frame)
    if img.shape[2] == 1:
        return img
    return np.ascontiguousarray(np.clip(img @ LUMA, 0.0, 1.0)[:, :, None])
