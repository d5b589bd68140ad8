"""Periodic reference resetting: overlapping clips anchored at k*(N-1)."""
from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Clip:
    index: int
    start: int
    frames: tuple[int, ...]

    @property
    def reference(self) -> int:
        return self.start


@dataclass(frozen=True)
class ClipSchedule:
    total_frames: int
    clip_length: int
    clips: tuple[Clip, ...]

    def reference_of(self, t: int) -> int:
        return reference_of(t, self)

    def clip_of(self, t: int) -> Clip:
        """The clip that processes frame ``t`` (the later one on boundaries)."""
        if not 0 <= t < self.total_frames:
            raise ValueError(f"frame index {t} outside [0, {self.total_frames})")
        if self.total_frames == 1:
            return self.clips[0]
        return self.clips[min(t // (self.clip_length - 1), len(self.clips) - 1)]

    def reference_indices(self) -> list[int]:
        return [c.reference for c in self.clips]


def build_schedule(total_frames: int, clip_length: int) -> ClipSchedule:
    """Partition ``range(total_frames)`` into ceil(T/(N-1)) clips.

    Clip k starts at s_k = k*(N-1) and holds up to N frames, truncated at
    T-1, so consecutive clips share exactly one frame.
    """
    if total_frames < 1:
        raise ValueError("total_frames must be >= 1")
    if clip_length < 2:
        raise ValueError("clip_length must be >= 2")
    step = clip_length - 1
    n_clips = math.ceil(total_frames / step)
    clips = []
    for k in range(n_clips):
        s = k * step
        end = min(s + clip_length, total_frames)
        clips.append(Clip(index=k, start=s, frames=tuple(range(s, end))))
    return ClipSchedule(total_frames, clip_length, tuple(clips))


def reference_of(t: int, schedule: ClipSchedule) -> int:
    """Reference frame index used when synthesizing frame ``t``.

    Frames shared by two clips belong to the later clip, where they are the
    reference themselves.
    """
    return schedule.clip_of(t).reference
