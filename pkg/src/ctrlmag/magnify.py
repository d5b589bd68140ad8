"""Analytic mask-conditioned Lagrangian magnification and the full pipeline.

Each output frame backward-samples its clip reference along the amplified
flow ``a(x) * G(x)``, where ``G`` maps the current grid into the reference
and ``a(x) = 1 + (alpha - 1) * map(x)``. Map value 0 reproduces the current
frame (up to warp error) and 1 applies the full factor.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .core import as_frame, as_mask, check_same_size, pixel_grid, sample_field
from .flow import FlowParams, estimate_flow
from .masking import DilationSpec, SofteningSpec, build_map, propagate_mask
from .prr import ClipSchedule, build_schedule

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MagnifyConfig:
    alpha: float = 8.0
    clip_length: int = 4
    dilation: DilationSpec = field(default_factory=DilationSpec)
    softening: SofteningSpec = field(default_factory=SofteningSpec)
    flow: FlowParams = field(default_factory=FlowParams)
    # photometric residual gate for mask tracking; None disables it
    tracking_gate: float | None = 0.08
    warp_method: str = "splat"

    def __post_init__(self):
        if not self.alpha >= 1:
            raise ValueError("alpha must be >= 1")
        if self.clip_length < 2:
            raise ValueError("clip_length must be >= 2")
        if self.warp_method not in ("splat", "backward"):
            raise ValueError("warp_method must be 'splat' or 'backward'")


@dataclass
class MagnifiedSequence:
    frames: list
    maps: list
    schedule: ClipSchedule
    masks: list
    records: list
    events: list


def effective_factor(mag_map: np.ndarray, alpha: float) -> np.ndarray:
    return 1.0 + (alpha - 1.0) * np.clip(mag_map, 0.0, 1.0)


def warp_amplified(ref: np.ndarray, flow: np.ndarray, mag_map: np.ndarray, alpha: float,
                   method: str = "splat") -> np.ndarray:
    """Backward-sample ``ref`` along the amplified flow.

    ``method="backward"`` samples ``ref(x + a(x) G(x))`` directly. That cannot
    move content past the edge of the map, because the flow outside a moving
    region is near zero. ``method="splat"`` also sends each magnified pixel's
    sampling offset ``a(x) G(x)`` forward to where that pixel lands,
    ``x - (a(x) - 1) G(x)``. Where splats arrive they take over, blended by
    their coverage. Pixels with ``a = 1`` never splat.
    """
    if method not in ("splat", "backward"):
        raise ValueError(f"unknown warp method {method!r}")
    h, w = flow.shape[:2]
    a = effective_factor(mag_map, alpha)
    xs, ys = pixel_grid(h, w)
    offset = a[..., None] * flow
    if method == "splat":
        src = a > 1.0
        if src.any():
            lift = (a - 1.0)[src]
            zx = xs[src] - lift * flow[..., 0][src]
            zy = ys[src] - lift * flow[..., 1][src]
            weight, sums = _kernels.splat_bilinear(zx, zy, offset[src], h, w)
            cover = np.minimum(weight, 1.0)[..., None]
            splatted = sums / np.maximum(weight, 1e-12)[..., None]
            offset = cover * splatted + (1.0 - cover) * offset
    return np.clip(sample_field(ref, xs + offset[..., 0], ys + offset[..., 1]), 0.0, 1.0)


def magnify_frame(ref, cur, mag_map, alpha: float, params: FlowParams | None = None, flow=None,
                  method: str = "splat"):
    """Magnify the motion ``ref -> cur`` inside ``mag_map``.

    Returns ``cur`` itself when ``alpha == 1`` or the map is all zero.
    ``flow`` may carry a precomputed ``estimate_flow(ref, cur)``.
    """
    if not alpha >= 1:
        raise ValueError("alpha must be >= 1")
    r = as_frame(ref)
    c = as_frame(cur)
    m = np.asarray(mag_map, dtype=np.float64)
    check_same_size(r, c, m)
    if alpha == 1 or not np.any(m > 0):
        return c
    if flow is None:
        flow = estimate_flow(r, c, params or FlowParams())
    return warp_amplified(r, flow, m, alpha, method)


def track_masks(frames, mask0, cfg: MagnifyConfig, events=None) -> list:
    """Stage 1: propagate the inner mask through the whole sequence."""
    masks = [as_mask(mask0)]
    collapsed = not masks[0].any()
    if collapsed and events is not None:
        events.append({"event": "tracking_collapse", "frame": 0})
    for t in range(1, len(frames)):
        m = propagate_mask(masks[-1], frames[t - 1], frames[t], cfg.flow, gate=cfg.tracking_gate)
        if not m.any() and not collapsed:
            collapsed = True
            log.warning("inner mask lost at frame %d; maps are zero from here on", t)
            if events is not None:
                events.append({"event": "tracking_collapse", "frame": t})
        masks.append(m)
    return masks


def _synthesize(t, frames, masks, schedule, cfg):
    clip = schedule.clip_of(t)
    r = clip.reference
    cur = frames[t]
    inner = masks[t]
    need_flow = t != r and inner.any() and (cfg.alpha != 1 or cfg.softening.mode == "motion")
    flow = estimate_flow(frames[r], cur, cfg.flow) if need_flow else np.zeros(cur.shape[:2] + (2,))
    mag_map, radius, ring_max = build_map(inner, cfg.dilation, cfg.softening, flow)
    if t == r:
        out = cur
    else:
        out = magnify_frame(frames[r], cur, mag_map, cfg.alpha, cfg.flow, flow=flow, method=cfg.warp_method)
    record = {
        "frame": t,
        "clip": clip.index,
        "reference": r,
        "mask_area": int(inner.sum()),
        "radius": int(radius),
        "ring_max_flow": ring_max,
        "bypass": out is cur,
    }
    return out, mag_map, record


def magnify_sequence(frames, mask0, cfg: MagnifyConfig | None = None, threads: int = 1) -> MagnifiedSequence:
    """Run mask tracking, reference scheduling, map assembly and synthesis.

    Stage 2 frames are independent and run on ``threads`` workers; results
    do not depend on the worker count.
    """
    cfg = cfg or MagnifyConfig()
    frames = [as_frame(f) for f in frames]
    if not frames:
        raise ValueError("empty frame sequence")
    mask0 = as_mask(mask0)
    check_same_size(*frames, mask0)
    events: list = []
    masks = track_masks(frames, mask0, cfg, events)
    schedule = build_schedule(len(frames), cfg.clip_length)

    def work(t):
        return _synthesize(t, frames, masks, schedule, cfg)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(len(frames))))
    else:
        results = [work(t) for t in range(len(frames))]
    return MagnifiedSequence(
        frames=[r[0] for r in results],
        maps=[r[1] for r in results],
        schedule=schedule,
        masks=masks,
        records=[r[2] for r in results],
        events=events,
    )
