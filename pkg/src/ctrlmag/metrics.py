"""Magnification accuracy (E_motion, E_mag) and image quality (SSIM, PSNR)."""
from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from .core import as_flow, as_frame, check_same_size, to_grayscale

PSNR_IDENTICAL = math.inf
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5


def e_motion(flow_orig, flow_mag, alpha: float, region=None) -> float:
    """Mean per-pixel L1 distance between alpha * flow_orig and flow_mag."""
    a = as_flow(flow_orig)
    b = as_flow(flow_mag)
    check_same_size(a, b)
    err = np.abs(alpha * a - b).sum(axis=2)
    if region is not None:
        err = err[np.asarray(region, dtype=bool)]
    return float(err.mean())


def e_mag(flow_orig, flow_mag, alpha: float, epsilon: float = 1e-7, region=None) -> float:
    """|‖flow_mag‖ / (‖flow_orig‖ + eps) - alpha| with whole-field L2 norms."""
    a = as_flow(flow_orig)
    b = as_flow(flow_mag)
    check_same_size(a, b)
    if region is not None:
        sel = np.asarray(region, dtype=bool)
        a = a[sel]
        b = b[sel]
    ratio = np.sqrt(np.sum(b * b)) / (np.sqrt(np.sum(a * a)) + epsilon)
    return float(abs(ratio - alpha))


def _gaussian_window() -> np.ndarray:
    r = SSIM_WINDOW // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2 * SSIM_SIGMA**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = len(g) // 2
    out = ndimage.correlate1d(img, g, axis=0, mode="reflect")
    out = ndimage.correlate1d(out, g, axis=1, mode="reflect")
    if img.shape[0] > 2 * r and img.shape[1] > 2 * r:
        out = out[r:-r, r:-r]
    return out


def ssim_map(a, b) -> np.ndarray:
    x = to_grayscale(as_frame(a))[:, :, 0]
    y = to_grayscale(as_frame(b))[:, :, 0]
    check_same_size(x, y)
    c1 = (0.01 * 1.0) ** 2
    c2 = (0.03 * 1.0) ** 2
    g = _gaussian_window()
    mx = _filter_valid(x, g)
    my = _filter_valid(y, g)
    sxx = _filter_valid(x * x, g) - mx * mx
    syy = _filter_valid(y * y, g) - my * my
    sxy = _filter_valid(x * y, g) - mx * my
    return ((2 * mx * my + c1) * (2 * sxy + c2)) / ((mx * mx + my * my + c1) * (sxx + syy + c2))


def ssim(a, b) -> float:
    """Gaussian-window SSIM (11x11, sigma 1.5, L = 1) on luminance.

    The mean is taken over window positions fully inside the image.
    """
    return float(ssim_map(a, b).mean())


def psnr(a, b) -> float:
    """10 log10(1 / MSE); identical frames give ``PSNR_IDENTICAL`` (+inf)."""
    x = as_frame(a)
    y = as_frame(b)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    mse = float(np.mean((x - y) ** 2))
    if mse == 0.0:
        return PSNR_IDENTICAL
    return 10.0 * math.log10(1.0 / mse)


def psnr_from_mse(mse: float) -> float:
    return PSNR_IDENTICAL if mse == 0 else 10.0 * math.log10(1.0 / mse)


def aggregate(values) -> dict:
    """Mean and population std of the defined (non-None) values.

    Infinite entries propagate: mean is +inf; std is 0 when every value is
    +inf and +inf otherwise.
    """
    vals = np.array([v for v in values if v is not None], dtype=np.float64)
    if vals.size == 0:
        return {"mean": None, "std": None, "count": 0}
    if np.isinf(vals).any():
        all_inf = bool(np.isinf(vals).all())
        return {"mean": math.inf, "std": 0.0 if all_inf else math.inf, "count": int(vals.size)}
    return {"mean": float(vals.mean()), "std": float(vals.std()), "count": int(vals.size)}


FLOW_ESTIMATOR_NOTE = "built-in pyramidal windowed least-squares flow (no pretrained flow network)"
COLUMNS = ("frame", "e_motion", "e_mag", "ssim", "psnr")


def evaluate_sequence(original, magnified, alpha: float, clip_length: int, mask=None,
                      params=None, names=None) -> dict:
    """Per-frame metrics of ``magnified`` against ``original``.

    Accuracy metrics compare flows from each frame's clip reference (taken
    from the original sequence) to the original and magnified frames, both
    on the reference grid. Reference frames have zero temporal distance, so
    their accuracy entries are None. All aggregates skip reference frames
    unless the sequence is a single frame.
    """
    from .flow import FlowParams, estimate_flow
    from .prr import build_schedule

    if len(original) != len(magnified):
        raise ValueError(f"sequence length mismatch: {len(original)} vs {len(magnified)}")
    if not original:
        raise ValueError("empty sequence")
    params = params or FlowParams()
    schedule = build_schedule(len(original), clip_length)
    region = None if mask is None else np.asarray(mask, dtype=bool)
    rows = []
    for t, (orig, mag) in enumerate(zip(original, magnified)):
        r = schedule.reference_of(t)
        row = {
            "frame": names[t] if names else t,
            "index": t,
            "reference": r,
            "e_motion": None,
            "e_mag": None,
            "e_mag_masked": None,
            "ssim": ssim(orig, mag),
            "psnr": psnr(orig, mag),
        }
        if t != r:
            flow_orig = estimate_flow(orig, original[r], params)
            flow_mag = estimate_flow(mag, original[r], params)
            row["e_motion"] = e_motion(flow_orig, flow_mag, alpha)
            row["e_mag"] = e_mag(flow_orig, flow_mag, alpha)
            if region is not None and region.any():
                row["e_mag_masked"] = e_mag(flow_orig, flow_mag, alpha, region=region)
        rows.append(row)
    scored = [row for row in rows if row["index"] != row["reference"]] or rows
    aggregates = {k: aggregate(row[k] for row in scored) for k in ("e_motion", "e_mag", "e_mag_masked", "ssim", "psnr")}
    return {
        "alpha": alpha,
        "clip_length": clip_length,
        "flow_params": {
            "pyramid_levels": params.pyramid_levels,
            "window_radius": params.window_radius,
            "refinement_iterations": params.refinement_iterations,
            "presmooth_sigma": params.presmooth_sigma,
        },
        "flow_estimator": FLOW_ESTIMATOR_NOTE,
        "frames": rows,
        "aggregates": aggregates,
    }
