"""PNG frame directories, masks, JSON and JSON-lines files."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np
from PIL import Image

FRAME_PATTERN = "frame_{:06d}.png"


class InputError(ValueError):
    """Bad user input: missing files, mismatched sizes, invalid parameters."""


def frame_name(t: int) -> str:
    return FRAME_PATTERN.format(t)


def to_uint8(frame: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(frame) * 255.0), 0, 255).astype(np.uint8)


def read_png(path) -> np.ndarray:
    """8-bit PNG as an (H, W, C) float64 frame in [0, 1]; alpha is dropped."""
    with Image.open(path) as im:
        if im.mode in ("L", "I;16", "I", "1"):
            arr = np.asarray(im.convert("L"))[:, :, None]
        else:
            arr = np.asarray(im.convert("RGB"))
    return arr.astype(np.float64) / 255.0


def write_png(path, frame: np.ndarray) -> None:
    data = to_uint8(frame)
    if data.ndim == 3 and data.shape[2] == 1:
        data = data[:, :, 0]
    Image.fromarray(data).save(path, format="PNG")


def list_frames(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise InputError(f"not a directory: {d}")
    paths = sorted(p for p in d.glob("*.png") if p.name.startswith("frame_"))
    if not paths:
        paths = sorted(d.glob("*.png"))
    if not paths:
        raise InputError(f"no PNG frames in {d}")
    return paths


def read_frames(directory) -> tuple[list[str], list[np.ndarray]]:
    paths = list_frames(directory)
    frames = [read_png(p) for p in paths]
    shapes = {f.shape for f in frames}
    if len(shapes) != 1:
        raise InputError(f"frames in {directory} differ in size: {sorted(shapes)}")
    return [p.name for p in paths], frames


def read_mask(path) -> np.ndarray:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"mask not found: {p}")
    with Image.open(p) as im:
        return np.asarray(im.convert("L")) > 0


def write_mask(path, mask: np.ndarray) -> None:
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)).save(path, format="PNG")


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"file not found: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON in {p}: {exc}") from exc


def write_jsonl(path, records) -> None:
    lines = [json.dumps(_jsonable(r), sort_keys=True) for r in records]
    Path(path).write_text("".join(line + "\n" for line in lines))


def read_jsonl(path) -> list[dict]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"log not found: {p}")
    return [json.loads(line) for line in p.read_text().splitlines() if line.strip()]
