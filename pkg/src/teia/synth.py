"""Seeded synthetic sessions with known ground truth, plus naive reference
implementations of the core numeric operations.

The generator lays one detection per (equipment, frame) whose best
valid-interaction score is clamp(base + boost * [frame in GT] + noise),
with regions positioned so mapping resolves every detection at IoU 1.
Noise comes from numpy's default PCG64 generator, so a spec with the same
seed always produces the same bundle byte for byte.

The oracle functions deliberately avoid the main code paths: smoothing by
explicit shifted accumulation, segmentation by a per-frame scan, confusion
by per-frame rational timestamps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import SynthSpecError
from .evaluation import Confusion
from .types import (
    AlarmEvent,
    AnnotationInterval,
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    FixationEvent,
    Interval,
    SessionBundle,
    SessionMeta,
    as_fps,
    frame_time,
)

_LABEL_CYCLE = ("IV", "MV", "ProPaq")


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for one synthetic session.

    `gt_intervals` maps equipment_id to disjoint (start_frame, end_frame)
    pairs, end exclusive.
    """

    frame_count: int
    fps: Fraction
    equipment: tuple[str, ...]
    gt_intervals: Mapping[str, tuple[tuple[int, int], ...]]
    base_score: float = 0.1
    active_boost: float = 0.7
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fps", as_fps(self.fps))
        object.__setattr__(self, "equipment", tuple(self.equipment))
        if self.frame_count < 0:
            raise SynthSpecError("must be >= 0", "frame_count")
        if len(set(self.equipment)) != len(self.equipment) or not self.equipment:
            raise SynthSpecError("must be nonempty and unique", "equipment")
        b, a = self.base_score, self.active_boost
        if not (0.0 <= b < b + a <= 1.0):
            raise SynthSpecError("need 0 <= base < base + boost <= 1", "base_score")
        if self.noise_sigma < 0:
            raise SynthSpecError("must be >= 0", "noise_sigma")
        gt = {}
        for eq, spans in self.gt_intervals.items():
            if eq not in self.equipment:
                raise SynthSpecError(f"unknown equipment {eq!r}", "gt_intervals")
            spans = tuple((int(s), int(e)) for s, e in spans)
            last_end = None
            for s, e in spans:
                if not 0 <= s < e <= self.frame_count:
                    raise SynthSpecError(f"bad span ({s}, {e})", "gt_intervals")
                if last_end is not None and s < last_end:
                    raise SynthSpecError("spans must be disjoint and sorted", "gt_intervals")
                last_end = e
            gt[eq] = spans
        object.__setattr__(self, "gt_intervals", gt)


def _region_for(index: int, equipment_id: str, camera_id: str) -> EquipmentRegion:
    x0 = 200.0 * index
    box = BoundingBox(x0, 0.0, x0 + 100.0, 100.0)
    return EquipmentRegion(equipment_id, _LABEL_CYCLE[index % len(_LABEL_CYCLE)],
                           box, camera_id)


def generate_session(spec: SynthSpec, session_id: Optional[str] = None,
                     camera_id: str = "cam-1") -> SessionBundle:
    """Deterministic bundle whose score series is known by construction."""
    session_id = session_id or f"synth-{spec.seed}"
    meta = SessionMeta(session_id, camera_id, spec.fps, spec.frame_count)
    regions = [_region_for(i, eq, camera_id) for i, eq in enumerate(spec.equipment)]
    region_by_eq = {r.equipment_id: r for r in regions}

    rng = np.random.default_rng(spec.seed)
    detections: list[DetectionRecord] = []
    annotations: list[AnnotationInterval] = []
    alarms: list[AlarmEvent] = []
    fixations: list[FixationEvent] = []

    for eq in spec.equipment:
        spans = spec.gt_intervals.get(eq, ())
        active = np.zeros(spec.frame_count, dtype=bool)
        for s, e in spans:
            active[s:e] = True
            annotations.append(AnnotationInterval(
                eq, frame_time(s, spec.fps), frame_time(e, spec.fps)))
        scores = np.full(spec.frame_count, spec.base_score)
        scores[active] += spec.active_boost
        if spec.noise_sigma > 0:
            scores = scores + rng.normal(0.0, spec.noise_sigma, spec.frame_count)
        scores = np.clip(scores, 0.0, 1.0)
        box = region_by_eq[eq].box
        for frame in range(spec.frame_count):
            detections.append(DetectionRecord(
                frame=frame,
                human_box=box,
                object_box=box,
                object_class="synthetic",
                object_conf=1.0,
                verbs={"hold": float(scores[frame])},
            ))
        for k, (s, e) in enumerate(spans):
            start_t = frame_time(s, spec.fps)
            end_t = frame_time(e, spec.fps)
            onset = max(Fraction(0), start_t - 2)
            alarms.append(AlarmEvent(
                alarm_id=f"{eq}-alarm-{k}",
                equipment_id=eq,
                onset_s=onset,
                resolved_s=(start_t + end_t) / 2,
            ))
            fix_start = onset + Fraction(1, 2)
            fix_end = fix_start + Fraction(1, 2)
            if fix_end <= meta.duration_s:
                fixations.append(FixationEvent(fix_start, fix_end, eq))

    detections.sort(key=lambda d: d.frame)
    fixations.sort(key=lambda f: f.start_s)
    kept: list[FixationEvent] = []
    for fix in fixations:
        if not kept or fix.start_s >= kept[-1].end_s:
            kept.append(fix)

    return SessionBundle(
        meta=meta,
        detections=tuple(detections),
        regions=tuple(regions),
        annotations=tuple(annotations),
        alarms=tuple(alarms),
        fixations=tuple(kept),
    )


def oracle_smooth(values: Sequence[float], sigma: float, radius: int) -> np.ndarray:
    """Reference smoother: per-tap shifted accumulation of raw Gaussian
    weights, renormalized by the weight actually in range."""
    x = np.asarray(values, dtype=np.float64)
    n = x.size
    num = np.zeros(n)
    den = np.zeros(n)
    for k in range(-radius, radius + 1):
        if abs(k) >= n:
            continue
        w = math.exp(-(k * k) / (2.0 * sigma * sigma))
        if k < 0:
            num[-k:] += w * x[:n + k]
            den[-k:] += w
        elif k > 0:
            num[:n - k] += w * x[k:]
            den[:n - k] += w
        else:
            num += w * x
            den += w
    return num / den


def oracle_segment(values: Sequence[float], threshold: float, fps,
                   equipment_id: str = "eq") -> list[Interval]:
    """Reference segmenter: linear frame scan, no merging or min-length."""
    fps = as_fps(fps)
    out: list[Interval] = []
    run_start = None
    peak = 0.0
    for frame, value in enumerate(values):
        if value >= threshold:
            if run_start is None:
                run_start, peak = frame, value
            else:
                peak = max(peak, value)
        elif run_start is not None:
            out.append(Interval(equipment_id, frame_time(run_start, fps),
                                frame_time(frame, fps), float(peak)))
            run_start = None
    if run_start is not None:
        out.append(Interval(equipment_id, frame_time(run_start, fps),
                            frame_time(len(values), fps), float(peak)))
    return out


def oracle_confusion(pred: Sequence, gt: Sequence, frame_count: int, fps) -> Confusion:
    """Reference confusion: test every frame timestamp against every span."""
    fps = as_fps(fps)

    def covered(t: Fraction, intervals) -> bool:
        return any(iv.start_s <= t < iv.end_s for iv in intervals)

    tp = fp = fn = tn = 0
    for frame in range(frame_count):
        t = frame_time(frame, fps)
        p, g = covered(t, pred), covered(t, gt)
        if p and g:
            tp += 1
        elif p:
            fp += 1
        elif g:
            fn += 1
        else:
            tn += 1
    return Confusion(tp, fp, fn, tn)
