"""Temporal smoothing and threshold segmentation of score signals.

Frame-level interaction scores fluctuate sharply from frame to frame, so
before segmenting we convolve each signal with a normalized Gaussian
kernel.  At the signal boundaries the kernel is truncated to the in-range
taps and renormalized, which avoids artificial dips at session edges.
Segmentation keeps maximal runs of frames at or above the threshold,
merges runs separated by small gaps, then drops runs that are too short
(merge happens before the length filter).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from . import evaluation
from .errors import DomainError, EmptyGridError, NoAnnotationsError, ValidationError
from .mapping import ScoreSeries
from .types import AnnotationInterval, Interval, as_seconds, frame_time


@dataclass(frozen=True)
class SmoothingParams:
    """Gaussian smoothing plus segmentation settings.

    `radius` is the kernel half-width in frames; leave it None to use
    ceil(3 * sigma), which keeps the truncated mass below 0.3%.
    """

    sigma: float
    threshold: float = 0.5
    radius: Optional[int] = None
    min_len_s: Fraction = Fraction(0)
    gap_merge_s: Fraction = Fraction(0)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValidationError("must be positive", "sigma")
        if not 0.0 < self.threshold < 1.0:
            raise ValidationError("must be in (0, 1)", "threshold")
        if self.radius is not None and (not isinstance(self.radius, int) or self.radius < 1):
            raise ValidationError("must be a positive integer", "radius")
        object.__setattr__(self, "min_len_s", as_seconds(self.min_len_s, "min_len_s"))
        object.__setattr__(self, "gap_merge_s", as_seconds(self.gap_merge_s, "gap_merge_s"))
        if self.min_len_s < 0:
            raise ValidationError("must be >= 0", "min_len_s")
        if self.gap_merge_s < 0:
            raise ValidationError("must be >= 0", "gap_merge_s")

    @property
    def effective_radius(self) -> int:
        return self.radius if self.radius is not None else max(1, math.ceil(3 * self.sigma))


@dataclass(frozen=True)
class CalibrationResult:
    best: SmoothingParams
    objective: float
    grid: tuple[tuple[SmoothingParams, float], ...]


def gaussian_kernel(sigma: float, radius: int) -> np.ndarray:
    """Normalized Gaussian weights for offsets -radius..radius."""
    if not (isinstance(sigma, (int, float)) and sigma > 0):
        raise DomainError(f"sigma must be positive, got {sigma!r}")
    if not (isinstance(radius, int) and radius >= 1):
        raise DomainError(f"radius must be a positive integer, got {radius!r}")
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    weights = np.exp(-(offsets ** 2) / (2.0 * float(sigma) ** 2))
    return weights / weights.sum()


def smooth(series: ScoreSeries, params: SmoothingParams) -> ScoreSeries:
    """Convolve with the Gaussian kernel, truncate-and-renormalize at edges."""
    values = series.values
    n = values.size
    if n == 0:
        return ScoreSeries(series.equipment_id, values.copy(), series.fps)
    radius = params.effective_radius
    kernel = gaussian_kernel(params.sigma, radius)
    num = np.convolve(values, kernel, mode="full")[radius:radius + n]
    den = np.convolve(np.ones(n), kernel, mode="full")[radius:radius + n]
    out = num / den
    # Weighted averages cannot leave the input range; clip float dust so the
    # bound holds exactly.
    np.clip(out, values.min(), values.max(), out=out)
    return ScoreSeries(series.equipment_id, out, series.fps)


def _runs_at_or_above(values: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    """Maximal runs [first, last] of frames with value >= threshold."""
    active = values >= threshold
    if not active.any():
        return []
    padded = np.concatenate(([False], active, [False]))
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    starts, stops = edges[0::2], edges[1::2]
    return [(int(a), int(b) - 1) for a, b in zip(starts, stops)]


def segment(series: ScoreSeries, params: SmoothingParams) -> list[Interval]:
    """Threshold-cutoff segmentation of a (smoothed) score signal.

    A run of frames first..last becomes the half-open span
    [first/fps, (last+1)/fps); each frame is a sample of duration 1/fps.
    """
    fps = series.fps
    runs = _runs_at_or_above(series.values, params.threshold)
    if not runs:
        return []

    merged: list[list[int]] = [list(runs[0])]
    for first, last in runs[1:]:
        gap = frame_time(first, fps) - frame_time(merged[-1][1] + 1, fps)
        if gap < params.gap_merge_s:
            merged[-1][1] = last
        else:
            merged.append([first, last])

    intervals = []
    for first, last in merged:
        start, end = frame_time(first, fps), frame_time(last + 1, fps)
        if end - start < params.min_len_s:
            continue
        peak = float(series.values[first:last + 1].max())
        intervals.append(Interval(series.equipment_id, start, end, peak))
    return intervals


def smooth_and_segment(series_by_eq: Mapping[str, ScoreSeries],
                       params: SmoothingParams) -> dict[str, list[Interval]]:
    return {eq: segment(smooth(s, params), params)
            for eq, s in sorted(series_by_eq.items())}


ValidationSession = tuple[Mapping[str, ScoreSeries], Sequence[AnnotationInterval]]


def _session_eval_inputs(session: ValidationSession):
    series_by_eq, annotations = session
    gt_by_eq: dict[str, list[AnnotationInterval]] = {}
    for ann in annotations:
        gt_by_eq.setdefault(ann.equipment_id, []).append(ann)
    return series_by_eq, gt_by_eq


def _objective_for_params(sessions: Sequence[ValidationSession],
                          smoothed: Sequence[Mapping[str, ScoreSeries]],
                          params: SmoothingParams, objective: str) -> float:
    per_session = []
    for (series_by_eq, annotations), smoothed_by_eq in zip(sessions, smoothed):
        _, gt_by_eq = _session_eval_inputs((series_by_eq, annotations))
        pred_by_eq = {eq: segment(s, params) for eq, s in smoothed_by_eq.items()}
        frame_count = max((s.frame_count for s in series_by_eq.values()), default=0)
        fps = next(iter(series_by_eq.values())).fps
        per_session.append((frame_count, fps, pred_by_eq, gt_by_eq))
    report = evaluation.pooled_report(per_session)
    if objective == "overlap":
        ratios = [m.overlap_ratio for m in report.per_equipment.values()
                  if m.overlap_ratio is not None]
        return 100.0 * sum(ratios) / len(ratios) if ratios else 0.0
    return report.macro_f1


def calibrate(sessions: Sequence[ValidationSession],
              sigma_grid: Sequence[float],
              threshold_grid: Sequence[float],
              *,
              radius: Optional[int] = None,
              min_len_s=0,
              gap_merge_s=0,
              objective: str = "macro_f1",
              workers: int = 1) -> CalibrationResult:
    """Exhaustive grid search for (sigma, threshold) against annotations.

    Every pair is scored by frame-level macro F1 (or mean overlap ratio when
    `objective="overlap"`) pooled across all validation sessions.  Ties break
    toward smaller sigma, then smaller threshold, so the result does not
    depend on grid order or evaluation concurrency.
    """
    if not sigma_grid or not threshold_grid:
        raise EmptyGridError("sigma_grid and threshold_grid must be nonempty")
    if not sessions or all(not s[1] for s in sessions):
        raise NoAnnotationsError("calibration requires validation annotations")
    if objective not in ("macro_f1", "overlap"):
        raise ValidationError(f"unknown objective {objective!r}", "objective")

    grid: list[tuple[SmoothingParams, float]] = []
    for sigma in sigma_grid:
        params_sigma = SmoothingParams(
            sigma=float(sigma), threshold=0.5, radius=radius,
            min_len_s=min_len_s, gap_merge_s=gap_merge_s)

        def smooth_session(session: ValidationSession):
            series_by_eq = session[0]
            return {eq: smooth(s, params_sigma) for eq, s in series_by_eq.items()}

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                smoothed = list(pool.map(smooth_session, sessions))
        else:
            smoothed = [smooth_session(s) for s in sessions]

        for threshold in threshold_grid:
            params = replace(params_sigma, threshold=float(threshold))
            score = _objective_for_params(sessions, smoothed, params, objective)
            grid.append((params, score))

    best_params, best_score = grid[0]
    for params, score in grid[1:]:
        better = score > best_score or (
            score == best_score
            and (params.sigma, params.threshold) < (best_params.sigma, best_params.threshold))
        if better:
            best_params, best_score = params, score
    return CalibrationResult(best=best_params, objective=best_score, grid=tuple(grid))
