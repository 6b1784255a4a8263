"""From raw detections to per-equipment, per-frame interaction scores.

The chain is: match each detected object box to a configured equipment
region by IoU (the detector's class label is ignored once the box sits on a
known region), keep only the relevance-mapped verbs, score each candidate
as object confidence times verb probability, and keep the best per
detection.  Stacking the winning valid-interaction scores per frame gives
one score signal per equipment region.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import ValidationError
from .types import (
    NO_INTERACTION,
    VALID_INTERACTION,
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    SessionBundle,
)


@dataclass(frozen=True)
class VerbMapping:
    """Which verb names count as interaction and which as its absence."""

    valid_verbs: frozenset[str] = frozenset({"hold", "carry"})
    none_verbs: frozenset[str] = frozenset({"watch", "no_interaction"})

    def __post_init__(self):
        object.__setattr__(self, "valid_verbs", frozenset(self.valid_verbs))
        object.__setattr__(self, "none_verbs", frozenset(self.none_verbs))
        if not self.valid_verbs:
            raise ValidationError("must be nonempty", "valid_verbs")
        if not self.none_verbs:
            raise ValidationError("must be nonempty", "none_verbs")
        if self.valid_verbs & self.none_verbs:
            raise ValidationError("must be disjoint from valid_verbs", "none_verbs")


@dataclass(frozen=True)
class MappedHoi:
    """One detection resolved to an equipment region with its best label."""

    frame: int
    equipment_id: str
    label: str
    score: float
    source: DetectionRecord
    iou: float


@dataclass
class ScoreSeries:
    """Frame-indexed interaction-score signal for one equipment region."""

    equipment_id: str
    values: np.ndarray
    fps: Fraction

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise ValidationError("must be one-dimensional", "values")
        if self.values.size and (self.values.min() < 0.0 or self.values.max() > 1.0):
            raise ValidationError("must be in [0, 1]", "values")

    @property
    def frame_count(self) -> int:
        return int(self.values.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreSeries):
            return NotImplemented
        return (self.equipment_id == other.equipment_id
                and self.fps == other.fps
                and np.array_equal(self.values, other.values))


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of two boxes; 0 when disjoint or degenerate."""
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def best_region(box: BoundingBox, regions: Iterable[EquipmentRegion],
                iou_min: float) -> Optional[tuple[EquipmentRegion, float]]:
    """Region with maximal IoU against `box` if it reaches `iou_min`.

    Ties resolve to the lexicographically smallest equipment_id.
    """
    best = None
    best_iou = 0.0
    for region in sorted(regions, key=lambda r: r.equipment_id):
        overlap = iou(box, region.box)
        if overlap > best_iou:
            best, best_iou = region, overlap
    if best is None or best_iou < iou_min:
        return None
    return best, best_iou


def assign_equipment(d: DetectionRecord, regions: Iterable[EquipmentRegion],
                     iou_min: float) -> Optional[str]:
    match = best_region(d.object_box, regions, iou_min)
    return match[0].equipment_id if match else None


def select_best_hoi(d: DetectionRecord, mapping: VerbMapping) -> Optional[tuple[str, float]]:
    """Best relevant (label, score) for a detection, or None.

    Score is object confidence times verb probability.  A tie between a
    valid verb and a none verb resolves to no_interaction.
    """
    best_valid = None
    best_none = None
    for verb in sorted(d.verbs):
        score = d.object_conf * d.verbs[verb]
        if verb in mapping.valid_verbs:
            if best_valid is None or score > best_valid:
                best_valid = score
        elif verb in mapping.none_verbs:
            if best_none is None or score > best_none:
                best_none = score
    if best_valid is None and best_none is None:
        return None
    if best_valid is None or (best_none is not None and best_none >= best_valid):
        return NO_INTERACTION, best_none
    return VALID_INTERACTION, best_valid


def map_detections(bundle: SessionBundle, mapping: VerbMapping,
                   iou_min: float) -> list[MappedHoi]:
    """Resolve every detection to (equipment, label, score) where possible.

    Detections that miss every region, or carry no relevant verb, are
    dropped (the detector saw something this pipeline does not track).
    """
    out: list[MappedHoi] = []
    for det in bundle.detections:
        match = best_region(det.object_box, bundle.regions, iou_min)
        if match is None:
            continue
        region, overlap = match
        best = select_best_hoi(det, mapping)
        if best is None:
            continue
        label, score = best
        out.append(MappedHoi(det.frame, region.equipment_id, label, score, det, overlap))
    return out


def _series_from_hois(hois: Iterable[MappedHoi], equipment_ids: Sequence[str],
                      frame_count: int, fps: Fraction) -> dict[str, ScoreSeries]:
    values = {eq: np.zeros(frame_count, dtype=np.float64) for eq in equipment_ids}
    for hoi in hois:
        if hoi.label != VALID_INTERACTION:
            continue
        arr = values[hoi.equipment_id]
        if hoi.score > arr[hoi.frame]:
            arr[hoi.frame] = hoi.score
    return {eq: ScoreSeries(eq, values[eq], fps) for eq in sorted(equipment_ids)}


def build_score_series(bundle: SessionBundle, mapping: VerbMapping,
                       iou_min: float) -> dict[str, ScoreSeries]:
    """Per-equipment score signal: max valid-interaction score per frame.

    Frames with no mapped valid HOI (including frames whose best HOI is
    no_interaction) score 0.  Within-frame detection order does not matter.
    """
    hois = map_detections(bundle, mapping, iou_min)
    ids = [r.equipment_id for r in bundle.regions]
    return _series_from_hois(hois, ids, bundle.meta.frame_count, bundle.meta.fps)


def build_score_series_by_trainee(
        bundle: SessionBundle, mapping: VerbMapping,
        iou_min: float) -> dict[tuple[str, Optional[str]], ScoreSeries]:
    """Like build_score_series but partitioned by the detections' trainee_id."""
    hois = map_detections(bundle, mapping, iou_min)
    trainees = sorted({h.source.trainee_id for h in hois}, key=lambda t: (t is None, t))
    out: dict[tuple[str, Optional[str]], ScoreSeries] = {}
    for trainee in trainees:
        subset = [h for h in hois if h.source.trainee_id == trainee]
        ids = [r.equipment_id for r in bundle.regions]
        series = _series_from_hois(subset, ids, bundle.meta.frame_count, bundle.meta.fps)
        for eq, s in series.items():
            out[(eq, trainee)] = s
    return out
