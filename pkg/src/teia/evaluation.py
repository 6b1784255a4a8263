"""Scoring predicted interaction intervals against expert annotations.

Two families of metrics: frame-level precision/recall/F1 (with the macro
average over equipment), and interval-level temporal metrics (overlap
ratio, falsely predicted interval count, false prediction duration, start
latency).  All interval arithmetic runs on exact rational seconds; frame
membership uses the convention that frame f is inside [start, end) iff
start <= f/fps < end.

When several sessions are evaluated together, counts and durations are
pooled per equipment (sessions live on independent timelines, so their
intervals are never merged with each other); the falsely-predicted count
is reported as the per-session mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import EmptyInputError, NoGroundTruthError
from .types import AnnotationInterval, Interval, SessionMeta

TimeSpan = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Confusion:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __add__(self, other: "Confusion") -> "Confusion":
        return Confusion(self.tp + other.tp, self.fp + other.fp,
                         self.fn + other.fn, self.tn + other.tn)


@dataclass(frozen=True)
class F1Scores:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class FalseStats:
    false_count: int
    false_duration_pct: float


@dataclass(frozen=True)
class EquipmentEval:
    precision: float
    recall: float
    f1: float
    overlap_ratio: Optional[float]
    false_count: float
    false_duration_pct: float
    start_latency_s: Optional[float]


@dataclass(frozen=True)
class EvalReport:
    per_equipment: dict[str, EquipmentEval]
    macro_f1: float
    per_session: dict[str, dict[str, EquipmentEval]]


def _spans(intervals: Sequence) -> list[TimeSpan]:
    return [(iv.start_s, iv.end_s) for iv in intervals]


def _union(spans: Sequence[TimeSpan]) -> list[TimeSpan]:
    """Merge spans into a disjoint sorted union (touching spans merge)."""
    merged: list[list[Fraction]] = []
    for start, end in sorted(spans):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [(a, b) for a, b in merged]


def _duration(spans: Sequence[TimeSpan]) -> Fraction:
    return sum((b - a for a, b in spans), Fraction(0))


def _intersection(a: Sequence[TimeSpan], b: Sequence[TimeSpan]) -> list[TimeSpan]:
    """Pairwise intersection of two disjoint sorted unions."""
    out: list[TimeSpan] = []
    i = j = 0
    while i < len(a) and j < len(b):
        lo = max(a[i][0], b[j][0])
        hi = min(a[i][1], b[j][1])
        if lo < hi:
            out.append((lo, hi))
        if a[i][1] <= b[j][1]:
            i += 1
        else:
            j += 1
    return out


def rasterize(intervals: Sequence, frame_count: int, fps: Fraction) -> np.ndarray:
    """Boolean frame mask: True where frame time falls inside some interval."""
    mask = np.zeros(frame_count, dtype=bool)
    for start, end in _spans(intervals):
        lo = max(0, math.ceil(start * fps))
        hi = min(frame_count, math.ceil(end * fps))
        if lo < hi:
            mask[lo:hi] = True
    return mask


def frame_confusion(pred: Sequence[Interval], gt: Sequence[AnnotationInterval],
                    meta: SessionMeta) -> Confusion:
    pred_mask = rasterize(pred, meta.frame_count, meta.fps)
    gt_mask = rasterize(gt, meta.frame_count, meta.fps)
    return Confusion(
        tp=int(np.count_nonzero(pred_mask & gt_mask)),
        fp=int(np.count_nonzero(pred_mask & ~gt_mask)),
        fn=int(np.count_nonzero(~pred_mask & gt_mask)),
        tn=int(np.count_nonzero(~pred_mask & ~gt_mask)),
    )


def f1(c: Confusion) -> F1Scores:
    """Precision, recall and their harmonic mean, all in percent.

    Any 0/0 is defined as 0, so an equipment with neither predictions nor
    ground truth scores 0, never NaN.
    """
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    recall = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    score = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return F1Scores(precision * 100.0, recall * 100.0, score * 100.0)


def macro_f1(per_equipment_f1: Sequence[float]) -> float:
    """Unweighted arithmetic mean of per-equipment F1 scores."""
    if not per_equipment_f1:
        raise EmptyInputError("macro F1 over an empty sequence is undefined")
    return math.fsum(per_equipment_f1) / len(per_equipment_f1)


def overlap_ratio(pred: Sequence[Interval], gt: Sequence[AnnotationInterval]) -> float:
    """Fraction of ground-truth duration covered by the predictions."""
    gt_union = _union(_spans(gt))
    gt_total = _duration(gt_union)
    if gt_total == 0:
        raise NoGroundTruthError("overlap ratio is undefined without ground truth")
    covered = _duration(_intersection(_union(_spans(pred)), gt_union))
    return float(covered / gt_total)


def false_interval_stats(pred: Sequence[Interval], gt: Sequence[AnnotationInterval],
                         overlap_cutoff: float = 0.0) -> FalseStats:
    """Falsely predicted interval count and false prediction duration.

    A predicted interval is false when the fraction of its duration inside
    the ground-truth union is <= `overlap_cutoff` (the default 0 means "no
    overlap at all").  The duration percentage is the share of total
    predicted time lying outside the ground-truth union; 0 when there are
    no predictions.
    """
    gt_union = _union(_spans(gt))
    count = 0
    for iv in pred:
        covered = _duration(_intersection([(iv.start_s, iv.end_s)], gt_union))
        if covered / (iv.end_s - iv.start_s) <= overlap_cutoff:
            count += 1
    pred_union = _union(_spans(pred))
    pred_total = _duration(pred_union)
    if pred_total == 0:
        return FalseStats(count, 0.0)
    outside = pred_total - _duration(_intersection(pred_union, gt_union))
    return FalseStats(count, float(outside / pred_total * 100))


def start_latency(pred: Sequence[Interval],
                  gt: Sequence[AnnotationInterval]) -> Optional[float]:
    """Mean delay from ground-truth starts to the earliest overlapping
    predicted start, clamped at 0 for early predictions; None when no
    ground-truth interval overlaps any prediction."""
    latencies = pooled_latencies(pred, gt)
    if not latencies:
        return None
    return float(sum(latencies, Fraction(0)) / len(latencies))


def pooled_latencies(pred: Sequence[Interval],
                     gt: Sequence[AnnotationInterval]) -> list[Fraction]:
    out = []
    for g in gt:
        overlapping = [p.start_s for p in pred
                       if min(p.end_s, g.end_s) > max(p.start_s, g.start_s)]
        if overlapping:
            out.append(max(Fraction(0), min(overlapping) - g.start_s))
    return out


SessionEvalInput = tuple[int, Fraction, Mapping[str, Sequence[Interval]],
                         Mapping[str, Sequence[AnnotationInterval]]]


def pooled_report(sessions: Sequence[SessionEvalInput],
                  session_ids: Optional[Sequence[str]] = None,
                  overlap_cutoff: float = 0.0) -> EvalReport:
    """Pool (frame_count, fps, pred_by_eq, gt_by_eq) tuples into one report.

    Equipment with no predictions and no annotations anywhere is skipped:
    its frame-level F1 would be the degenerate 0/0 case and would distort
    the macro average.
    """
    equipment = sorted({eq for _, _, pred, gt in sessions
                        for eq in (set(pred) | set(gt))
                        if pred.get(eq) or gt.get(eq)})
    per_equipment = {}
    for eq in equipment:
        per_equipment[eq] = _pooled_equipment(sessions, eq, overlap_cutoff)
    macro = macro_f1([m.f1 for m in per_equipment.values()]) if per_equipment else 0.0

    per_session: dict[str, dict[str, EquipmentEval]] = {}
    if session_ids is not None:
        for sid, session in zip(session_ids, sessions):
            eqs = sorted(eq for eq in equipment
                         if session[2].get(eq) or session[3].get(eq))
            per_session[sid] = {eq: _pooled_equipment([session], eq, overlap_cutoff)
                                for eq in eqs}
    return EvalReport(per_equipment=per_equipment, macro_f1=macro,
                      per_session=per_session)


def _pooled_equipment(sessions: Sequence[SessionEvalInput], eq: str,
                      overlap_cutoff: float) -> EquipmentEval:
    confusion = Confusion()
    inter_total = Fraction(0)
    gt_total = Fraction(0)
    pred_total = Fraction(0)
    outside_total = Fraction(0)
    latencies: list[Fraction] = []
    false_counts: list[int] = []
    for frame_count, fps, pred_by_eq, gt_by_eq in sessions:
        pred = list(pred_by_eq.get(eq, ()))
        gt = list(gt_by_eq.get(eq, ()))
        pred_mask = rasterize(pred, frame_count, fps)
        gt_mask = rasterize(gt, frame_count, fps)
        confusion = confusion + Confusion(
            tp=int(np.count_nonzero(pred_mask & gt_mask)),
            fp=int(np.count_nonzero(pred_mask & ~gt_mask)),
            fn=int(np.count_nonzero(~pred_mask & gt_mask)),
            tn=int(np.count_nonzero(~pred_mask & ~gt_mask)),
        )
        pred_union = _union(_spans(pred))
        gt_union = _union(_spans(gt))
        inter = _duration(_intersection(pred_union, gt_union))
        inter_total += inter
        gt_total += _duration(gt_union)
        pred_total += _duration(pred_union)
        outside_total += _duration(pred_union) - inter
        latencies.extend(pooled_latencies(pred, gt))
        false_counts.append(false_interval_stats(pred, gt, overlap_cutoff).false_count)

    scores = f1(confusion)
    ratio = float(inter_total / gt_total) if gt_total else None
    false_pct = float(outside_total / pred_total * 100) if pred_total else 0.0
    latency = (float(sum(latencies, Fraction(0)) / len(latencies))
               if latencies else None)
    mean_false = sum(false_counts) / len(false_counts) if false_counts else 0.0
    return EquipmentEval(
        precision=scores.precision, recall=scores.recall, f1=scores.f1,
        overlap_ratio=ratio, false_count=mean_false,
        false_duration_pct=false_pct, start_latency_s=latency,
    )


def evaluate_session(meta: SessionMeta,
                     pred_by_eq: Mapping[str, Sequence[Interval]],
                     gt_by_eq: Mapping[str, Sequence[AnnotationInterval]],
                     overlap_cutoff: float = 0.0) -> EvalReport:
    return pooled_report([(meta.frame_count, meta.fps, pred_by_eq, gt_by_eq)],
                         session_ids=[meta.session_id],
                         overlap_cutoff=overlap_cutoff)
