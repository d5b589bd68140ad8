"""Synthetic pulsating-disk scenes with exact ground truth.

The background and the disk carry independent band-limited textures. Both
are translated with the Fourier shift theorem, so subpixel motion is exact
for the underlying continuous texture. The disk edge is antialiased with a
one-pixel linear coverage ramp.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .masking import dilate

SCENARIOS = ("easy", "occlusion", "view_change", "deformation")


@dataclass(frozen=True)
class SceneSpec:
    width: int = 160
    height: int = 160
    frames: int = 30
    fps: float = 30.0
    center: tuple = (80.0, 80.0)
    radius: float = 48.0
    amplitude: float = 0.5
    frequency: float = 1.0
    direction: tuple = (1.0, 0.0)
    seed: int = 0
    scenario: str = "easy"
    # occlusion: rect (x0, y0, x1, y1), inclusive frame interval, colour, px/frame
    occluder: tuple = (20, 20, 140, 140)
    occlusion_interval: tuple = (10, 14)
    occluder_color: float = 0.2
    occluder_velocity: tuple = (0.0, 0.0)
    # view_change: global drift per frame
    drift: tuple = (0.2, 0.0)
    # deformation: radius modulation amplitude, same frequency as the pulsation
    radius_amplitude: float = 2.0
    channels: int = 1
    background_level: float = 0.3
    disk_level: float = 0.72
    texture_contrast: float = 0.12
    texture_scale: float = 2.0

    def __post_init__(self):
        validate_spec(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SceneSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown scene fields: {sorted(unknown)}")
        kw = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
        return cls(**kw)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def max_excursion(self) -> float:
        ext = self.amplitude + self.radius
        if self.scenario == "view_change":
            ext += math.hypot(*self.drift) * max(self.frames - 1, 0)
        if self.scenario == "deformation":
            ext += self.radius_amplitude
        return ext


def validate_spec(spec: SceneSpec) -> None:
    if spec.width < 8 or spec.height < 8:
        raise ValueError("scene must be at least 8x8")
    if spec.frames < 1:
        raise ValueError("frames must be >= 1")
    if spec.amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    if not spec.fps > 0 or spec.frequency < 0 or not 2 * spec.frequency < spec.fps:
        raise ValueError("need fps > 0 and 0 <= 2*frequency < fps")
    if spec.radius <= 0:
        raise ValueError("radius must be > 0")
    if spec.scenario not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    if spec.channels not in (1, 3):
        raise ValueError("channels must be 1 or 3")
    if len(spec.center) != 2 or len(spec.direction) != 2 or len(spec.drift) != 2:
        raise ValueError("center, direction and drift are 2-vectors")
    if math.hypot(*spec.direction) == 0:
        raise ValueError("direction must be nonzero")
    if spec.scenario == "deformation" and spec.radius_amplitude >= spec.radius:
        raise ValueError("radius_amplitude must be smaller than radius")
    ext = spec.max_excursion()
    cx, cy = spec.center
    if cx - ext < 0 or cy - ext < 0 or cx + ext > spec.width - 1 or cy + ext > spec.height - 1:
        raise ValueError("disk leaves the frame at maximum excursion")
    for v in (spec.background_level, spec.disk_level, spec.occluder_color):
        if not 0 <= v <= 1:
            raise ValueError("levels must lie in [0, 1]")


@dataclass
class GroundTruth:
    displacement: np.ndarray  # (T, 2) total disk displacement, gt(0) = 0
    drift: np.ndarray  # (T, 2) global content shift
    radii: np.ndarray  # (T,)
    masks: np.ndarray  # (T, H, W) bool
    occluded: np.ndarray  # (T,) bool
    events: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "displacement": self.displacement.tolist(),
            "drift": self.drift.tolist(),
            "radii": self.radii.tolist(),
            "occluded": self.occluded.astype(int).tolist(),
            "events": self.events,
        }


def _texture(shape, scale, rng):
    white = rng.standard_normal(shape)
    fy = np.fft.fftfreq(shape[0])[:, None]
    fx = np.fft.fftfreq(shape[1])[None, :]
    spectrum = np.fft.fft2(white) * np.exp(-2.0 * (np.pi * scale) ** 2 * (fx**2 + fy**2))
    return spectrum, fx, fy


def _shifted(spectrum, fx, fy, dx, dy, norm):
    ph = np.exp(-2j * np.pi * (fx * dx + fy * dy))
    return np.real(np.fft.ifft2(spectrum * ph)) / norm


def pulsation(spec: SceneSpec) -> np.ndarray:
    t = np.arange(spec.frames)
    u = np.asarray(spec.direction, float) / math.hypot(*spec.direction)
    s = spec.amplitude * np.sin(2 * np.pi * spec.frequency * t / spec.fps)
    return s[:, None] * u[None, :]


def make_scene(spec: SceneSpec):
    """Render ``spec``; returns ``(frames, mask0, truth)``."""
    validate_spec(spec)
    h, w, T = spec.height, spec.width, spec.frames
    rng = np.random.default_rng(spec.seed)
    drift = np.zeros((T, 2))
    if spec.scenario == "view_change":
        drift = np.arange(T)[:, None] * np.asarray(spec.drift, float)[None, :]
    disp = pulsation(spec) + drift
    radii = np.full(T, float(spec.radius))
    if spec.scenario == "deformation":
        radii = spec.radius + spec.radius_amplitude * np.sin(2 * np.pi * spec.frequency * np.arange(T) / spec.fps)

    margin = int(math.ceil(np.abs(drift).max(initial=0.0) + np.abs(disp).max(initial=0.0))) + 16
    canvas = (h + 2 * margin, w + 2 * margin)
    bg_spec, fx, fy = _texture(canvas, spec.texture_scale, rng)
    disk_spec, _, _ = _texture(canvas, spec.texture_scale, rng)
    bg_norm = np.real(np.fft.ifft2(bg_spec)).std()
    disk_norm = np.real(np.fft.ifft2(disk_spec)).std()
    tint = np.array([1.0, 0.78, 0.72]) if spec.channels == 3 else np.ones(1)

    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    crop = (slice(margin, margin + h), slice(margin, margin + w))
    frames, masks, occluded = [], [], np.zeros(T, bool)
    events = []
    t0, t1 = spec.occlusion_interval
    if spec.scenario == "occlusion":
        events.append({"event": "occlusion", "start": int(t0), "end": int(t1), "rect": list(spec.occluder)})
    if spec.scenario == "view_change":
        events.append({"event": "drift", "per_frame": list(spec.drift)})
    if spec.scenario == "deformation":
        events.append({"event": "radius_modulation", "amplitude": spec.radius_amplitude})

    for t in range(T):
        bg_tex = _shifted(bg_spec, fx, fy, drift[t, 0], drift[t, 1], bg_norm)[crop]
        disk_tex = _shifted(disk_spec, fx, fy, disp[t, 0], disp[t, 1], disk_norm)[crop]
        bg = spec.background_level + spec.texture_contrast * np.tanh(bg_tex / 1.5)
        disk = spec.disk_level + spec.texture_contrast * np.tanh(disk_tex / 1.5)
        cx = spec.center[0] + disp[t, 0]
        cy = spec.center[1] + disp[t, 1]
        dist = np.hypot(xs - cx, ys - cy)
        cover = np.clip(radii[t] + 0.5 - dist, 0.0, 1.0)
        img = bg + cover * (disk - bg)
        masks.append(dist <= radii[t])
        if spec.scenario == "occlusion" and t0 <= t <= t1:
            ox = spec.occluder_velocity[0] * (t - t0)
            oy = spec.occluder_velocity[1] * (t - t0)
            x0, y0, x1, y1 = spec.occluder
            rect = (xs >= x0 + ox) & (xs <= x1 + ox) & (ys >= y0 + oy) & (ys <= y1 + oy)
            img = np.where(rect, spec.occluder_color, img)
            occluded[t] = bool((rect & masks[-1]).sum() == masks[-1].sum())
        img = np.clip(img, 0.0, 1.0)
        frames.append(np.ascontiguousarray(img[:, :, None] * tint[None, None, :]))

    truth = GroundTruth(
        displacement=disp - disp[0],
        drift=drift,
        radii=radii,
        masks=np.stack(masks),
        occluded=occluded,
        events=events,
    )
    return frames, masks[0].copy(), truth


def truth_flow(spec: SceneSpec, truth: GroundTruth, t: int, r: int) -> np.ndarray:
    """Ground-truth field on frame ``t``'s grid pointing into frame ``r``.

    Disk pixels move by the disk displacement, the rest by the global drift,
    blended by the disk coverage of frame ``t``.
    """
    h, w = spec.height, spec.width
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    cx = spec.center[0] + truth.displacement[t, 0]
    cy = spec.center[1] + truth.displacement[t, 1]
    cover = np.clip(truth.radii[t] + 0.5 - np.hypot(xs - cx, ys - cy), 0.0, 1.0)
    d_disk = truth.displacement[r] - truth.displacement[t]
    d_bg = truth.drift[r] - truth.drift[t]
    out = np.empty((h, w, 2))
    for k in range(2):
        out[..., k] = d_bg[k] + cover * (d_disk[k] - d_bg[k])
    return out


def measure_centroid(frame, region) -> tuple[float, float]:
    """Centroid of the bright disk signal inside ``region``.

    The signal is a soft threshold halfway between the dark and bright
    populations of the region, so the textures inside each population carry
    no weight.
    """
    img = np.asarray(frame, dtype=np.float64)
    if img.ndim == 3:
        img = img @ np.array([0.299, 0.587, 0.114]) if img.shape[2] == 3 else img[:, :, 0]
    reg = np.asarray(region, dtype=bool)
    if not reg.any():
        raise ValueError("empty search region")
    vals = img[reg]
    lo, hi = np.percentile(vals, [5, 95])
    mid = 0.5 * (lo + hi)
    band = 0.25 * (hi - lo)
    if band <= 0:
        raise ValueError("no disk signal in region")
    weights = np.clip((img - (mid - band)) / (2 * band), 0.0, 1.0) * reg
    total = weights.sum()
    if total <= 0:
        raise ValueError("no disk signal in region")
    ys, xs = np.mgrid[0:img.shape[0], 0:img.shape[1]]
    return float((weights * xs).sum() / total), float((weights * ys).sum() / total)


def search_region(truth: GroundTruth, t: int, pad: int) -> np.ndarray:
    return dilate(truth.masks[t], pad)
