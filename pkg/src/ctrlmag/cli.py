"""Command line: ``ctrlmag synth | magnify | evaluate``.

Exit codes: 0 success, 2 input or validation error, 1 internal failure.
Errors are reported on stderr as one JSON object per line.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .flow import FlowParams
from .io import (InputError, frame_name, read_frames, read_json, read_jsonl, read_mask, write_json,
                 write_jsonl, write_mask, write_png)
from .magnify import MagnifyConfig, magnify_sequence
from .masking import SOFTENING_MODES, DilationSpec, SofteningSpec
from .metrics import COLUMNS, evaluate_sequence
from .synth import SceneSpec, make_scene

log = logging.getLogger("ctrlmag")

LOG_NAME = "magnify_log.jsonl"
TRUTH_NAME = "truth.json"
MASK_NAME = "mask.png"


@dataclass
class RunConfig:
    input: str | None = None
    output: str | None = None
    mask: str | None = None
    alpha: float = 8.0
    clip_len: int = 4
    soften: str = "distance"
    gamma: float = 1.0 / 15.0
    beta: float = 1.0
    flow_levels: int = 4
    flow_window: int = 7
    flow_iterations: int = 3
    seed: int = 0
    report: str | None = None
    emit_maps: bool = False
    threads: int = 1
    warp: str = "splat"
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if not self.alpha >= 1:
            raise InputError("alpha must be >= 1")
        if self.clip_len < 2:
            raise InputError("clip length must be >= 2")
        if self.soften not in SOFTENING_MODES:
            raise InputError(f"softening mode must be one of {SOFTENING_MODES}")
        if self.threads < 1:
            raise InputError("threads must be >= 1")

    def flow_params(self) -> FlowParams:
        return FlowParams(pyramid_levels=self.flow_levels, window_radius=self.flow_window,
                          refinement_iterations=self.flow_iterations)

    def magnify_config(self) -> MagnifyConfig:
        return MagnifyConfig(
            alpha=float(self.alpha),
            clip_length=int(self.clip_len),
            dilation=DilationSpec(gamma=self.gamma),
            softening=SofteningSpec(mode=self.soften, beta=self.beta),
            flow=self.flow_params(),
            warp_method=self.warp,
        )


_FIELDS = {f for f in RunConfig.__dataclass_fields__ if f != "extra"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the ``--config`` JSON file, then explicit flags."""
    values: dict = {}
    if getattr(args, "config", None):
        data = read_json(args.config)
        unknown = set(data) - _FIELDS
        if unknown:
            raise InputError(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    for key in _FIELDS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    try:
        cfg = RunConfig(**values)
    except TypeError as exc:
        raise InputError(str(exc)) from exc
    cfg.validate()
    return cfg


def cmd_synth(args) -> int:
    data = read_json(args.spec)
    if args.seed is not None:
        data["seed"] = args.seed
    try:
        spec = SceneSpec.from_dict(data)
    except (TypeError, ValueError) as exc:
        raise InputError(f"invalid scene spec: {exc}") from exc
    frames, mask0, truth = make_scene(spec)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    for t, f in enumerate(frames):
        write_png(out / frame_name(t), f)
    write_mask(out / MASK_NAME, mask0)
    write_json(out / TRUTH_NAME, {"spec": spec.to_dict(), **truth.to_dict()})
    return 0


def cmd_magnify(args) -> int:
    cfg = resolve_config(args)
    if not cfg.input or not cfg.output:
        raise InputError("--input and --output are required")
    if not cfg.mask:
        raise InputError("--mask is required")
    names, frames = read_frames(cfg.input)
    mask0 = read_mask(cfg.mask)
    if mask0.shape != frames[0].shape[:2]:
        raise InputError(f"mask size {mask0.shape} does not match frames {frames[0].shape[:2]}")
    result = magnify_sequence(frames, mask0, cfg.magnify_config(), threads=cfg.threads)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    for name, frame in zip(names, result.frames):
        write_png(out / name, frame)
    if cfg.emit_maps:
        maps_dir = out / "maps"
        maps_dir.mkdir(exist_ok=True)
        for name, m in zip(names, result.maps):
            write_png(maps_dir / name, m)
    header = {"type": "config", "version": __version__, "frames": len(frames),
              **{k: v for k, v in asdict(cfg).items() if k not in ("extra", "threads")}}
    records = [header]
    records += [{"type": "frame", "name": name, **rec} for name, rec in zip(names, result.records)]
    for ev in result.events:
        records.append({"type": "warning", **ev})
        print(json.dumps({"warning": ev["event"], "frame": ev["frame"]}), file=sys.stderr)
    write_jsonl(Path(args.log) if args.log else out / LOG_NAME, records)
    return 0


def _clip_length_from_log(path) -> int:
    for rec in read_jsonl(path):
        if rec.get("type") == "config" and "clip_len" in rec:
            return int(rec["clip_len"])
    raise InputError(f"no clip length recorded in {path}")


def cmd_evaluate(args) -> int:
    orig_dir = args.original or args.input
    mag_dir = args.magnified or args.output
    if not orig_dir or not mag_dir:
        raise InputError("--original/--input and --magnified are required")
    if not args.report:
        raise InputError("--report is required")
    if args.alpha is None or not args.alpha >= 1:
        raise InputError("--alpha >= 1 is required")
    names_o, orig = read_frames(orig_dir)
    names_m, mag = read_frames(mag_dir)
    if names_o != names_m:
        raise InputError("original and magnified directories are not frame-aligned")
    if orig[0].shape != mag[0].shape:
        raise InputError("original and magnified frames differ in size")
    if args.clip_len is not None:
        clip_len = args.clip_len
    else:
        log_path = Path(args.log) if args.log else Path(mag_dir) / LOG_NAME
        clip_len = _clip_length_from_log(log_path)
    if clip_len < 2:
        raise InputError("clip length must be >= 2")
    mask = read_mask(args.mask) if args.mask else None
    params = FlowParams(pyramid_levels=args.flow_levels or 4, window_radius=args.flow_window or 7)
    report = evaluate_sequence(orig, mag, float(args.alpha), clip_len, mask=mask, params=params, names=names_o)
    write_report(args.report, report)
    return 0


def write_report(path, report: dict) -> None:
    p = Path(path)
    json_path = p if p.suffix != ".csv" else p.with_suffix(".json")
    csv_path = p.with_suffix(".csv")
    p.parent.mkdir(parents=True, exist_ok=True)
    write_json(json_path, report)
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in report["frames"]:
            w.writerow([_cell(row[c]) for c in COLUMNS])


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return "inf" if v == float("inf") else repr(v)
    return v


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with run settings; flags override it")
    p.add_argument("--input", help="directory of input PNG frames")
    p.add_argument("--output", help="directory for magnified frames")
    p.add_argument("--mask", help="initial inner mask PNG (nonzero = set)")
    p.add_argument("--alpha", type=float)
    p.add_argument("--clip-len", dest="clip_len", type=int)
    p.add_argument("--soften", choices=SOFTENING_MODES)
    p.add_argument("--gamma", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--flow-levels", dest="flow_levels", type=int)
    p.add_argument("--flow-window", dest="flow_window", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--report")
    p.add_argument("--emit-maps", dest="emit_maps", action="store_const", const=True)
    p.add_argument("--threads", type=int)
    p.add_argument("--warp", choices=("splat", "backward"))
    p.add_argument("--log", help="JSON-lines log path (default: OUTPUT/magnify_log.jsonl)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrlmag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="render a synthetic scene with ground truth")
    p.add_argument("spec", help="scene spec JSON")
    p.add_argument("--output", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("magnify", help="magnify a frame directory")
    _add_run_flags(p)
    p.set_defaults(func=cmd_magnify)

    p = sub.add_parser("evaluate", help="score magnified frames against the originals")
    p.add_argument("--original")
    p.add_argument("--input", help="alias of --original")
    p.add_argument("--magnified")
    p.add_argument("--output", help="alias of --magnified")
    p.add_argument("--mask")
    p.add_argument("--alpha", type=float)
    p.add_argument("--report")
    p.add_argument("--clip-len", dest="clip_len", type=int, help="override the clip length from the log")
    p.add_argument("--log")
    p.add_argument("--flow-levels", dest="flow_levels", type=int)
    p.add_argument("--flow-window", dest="flow_window", type=int)
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, ValueError) as exc:
        print(json.dumps({"error": "input", "message": str(exc)}), file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001
        print(json.dumps({"error": "internal", "message": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
