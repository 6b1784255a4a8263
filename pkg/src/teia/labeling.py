"""Semi-automated labeling of detection frames for corpus building.

High-scoring mapped interactions are accepted outright; low-scoring ones
are arbitrated by hand-keypoint evidence: keypoints inside the (expanded)
object box confirm an interaction, while absence of keypoints even at a
lowered confidence threshold refutes it.  Records whose evidence lands
between the two thresholds, or that have no keypoint data at all, become
warning rows for human review instead of labels.

Also here: clustering-style duplicate removal for human boxes and the
merge that recovers humans found only by an auxiliary detector.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ValidationError
from .mapping import VerbMapping, best_region, iou
from .types import (
    NO_INTERACTION,
    VALID_INTERACTION,
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
)

HIGH_CONFIDENCE = "high_confidence"
SKELETON_CONFIRMED = "skeleton_confirmed"
SKELETON_REFUTED = "skeleton_refuted"

WARN_MISSING_SKELETON = "missing_skeleton"
WARN_AMBIGUOUS_SKELETON = "ambiguous_skeleton"


@dataclass(frozen=True)
class SkeletonFrame:
    """Hand keypoints for one frame: (x, y, confidence) triples."""

    frame: int
    hand_points: tuple[tuple[float, float, float], ...]
    trainee_hint: Optional[str] = None

    def __post_init__(self):
        points = []
        for i, (x, y, conf) in enumerate(self.hand_points):
            x, y, conf = float(x), float(y), float(conf)
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValidationError("coordinates must be finite", f"hand_points[{i}]")
            if not 0.0 <= conf <= 1.0:
                raise ValidationError("confidence must be in [0, 1]", f"hand_points[{i}]")
            points.append((x, y, conf))
        object.__setattr__(self, "hand_points", tuple(points))


@dataclass(frozen=True)
class LabeledFrameRecord:
    frame: int
    equipment_id: str
    label: str
    provenance: str
    score: float
    source: DetectionRecord


@dataclass(frozen=True)
class WarningRow:
    frame: int
    equipment_id: str
    reason: str
    score: float
    source: DetectionRecord


@dataclass(frozen=True)
class PartitionResult:
    records: tuple[LabeledFrameRecord, ...]
    warnings: tuple[WarningRow, ...]


def cluster_dedup(humans: Sequence[tuple[BoundingBox, float]],
                  iou_cluster: float) -> list[tuple[BoundingBox, float]]:
    """Collapse duplicate human boxes by transitive IoU clustering.

    Boxes whose pairwise IoU reaches `iou_cluster` are linked; linked
    groups close transitively, and each cluster keeps its highest-
    confidence box (ties: smaller area, then earlier input position).
    Representatives come back in input order.
    """
    n = len(humans)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if iou(humans[i][0], humans[j][0]) >= iou_cluster:
                parent[find(i)] = find(j)

    best_by_cluster: dict[int, int] = {}
    for i, (box, conf) in enumerate(humans):
        root = find(i)
        cur = best_by_cluster.get(root)
        if cur is None:
            best_by_cluster[root] = i
            continue
        cur_box, cur_conf = humans[cur]
        if (conf, -box.area, -i) > (cur_conf, -cur_box.area, -cur):
            best_by_cluster[root] = i
    keep = sorted(best_by_cluster.values())
    return [humans[i] for i in keep]


def skeleton_verify(sk: SkeletonFrame, object_box: BoundingBox,
                    margin_px: float, conf_min: float) -> bool:
    """True iff some hand point with confidence >= conf_min lies inside
    the object box expanded by margin_px on each side."""
    expanded = object_box.expand(margin_px)
    return any(conf >= conf_min and expanded.contains(x, y)
               for x, y, conf in sk.hand_points)


def merge_aux_humans(primary: Sequence[BoundingBox], aux: Sequence[BoundingBox],
                     iou_dup: float) -> list[BoundingBox]:
    """Primary boxes plus every auxiliary box that duplicates none of them."""
    out = list(primary)
    for box in aux:
        if all(iou(box, p) < iou_dup for p in primary):
            out.append(box)
    return out


def _valid_score(d: DetectionRecord, mapping: VerbMapping) -> Optional[float]:
    """Interaction evidence: object confidence times best valid-verb
    probability; None when the record carries no relevant verb at all."""
    relevant = mapping.valid_verbs | mapping.none_verbs
    if not any(v in relevant for v in d.verbs):
        return None
    return max((d.object_conf * p for v, p in d.verbs.items()
                if v in mapping.valid_verbs), default=0.0)


def partition_labels(detections: Sequence[DetectionRecord],
                     skeletons: Sequence[SkeletonFrame],
                     hi_score: float,
                     mapping: VerbMapping,
                     regions: Sequence[EquipmentRegion],
                     iou_min: float = 0.5,
                     margin_px: float = 10.0,
                     conf_min: float = 0.5,
                     conf_min_refute: float = 0.3) -> PartitionResult:
    """Label every region-mapped detection, or flag it for review.

    Interaction evidence >= hi_score labels valid_interaction outright.
    Below that, keypoints confirm at `conf_min`; no keypoints even at the
    lowered `conf_min_refute` refutes.  Evidence only in between, or a
    frame with no skeleton data, yields a warning row.  Output is ordered
    by frame, then input order.
    """
    if not 0.0 < hi_score < 1.0:
        raise ValidationError("must be in (0, 1)", "hi_score")
    by_frame: dict[int, list[SkeletonFrame]] = {}
    for sk in skeletons:
        by_frame.setdefault(sk.frame, []).append(sk)

    indexed = sorted(enumerate(detections), key=lambda item: (item[1].frame, item[0]))
    records: list[LabeledFrameRecord] = []
    warnings: list[WarningRow] = []
    for _, det in indexed:
        match = best_region(det.object_box, regions, iou_min)
        if match is None:
            continue
        equipment_id = match[0].equipment_id
        score = _valid_score(det, mapping)
        if score is None:
            continue
        if score >= hi_score:
            records.append(LabeledFrameRecord(
                det.frame, equipment_id, VALID_INTERACTION, HIGH_CONFIDENCE, score, det))
            continue
        frame_skeletons = by_frame.get(det.frame)
        if not frame_skeletons:
            warnings.append(WarningRow(
                det.frame, equipment_id, WARN_MISSING_SKELETON, score, det))
            continue
        confirmed = any(skeleton_verify(sk, det.object_box, margin_px, conf_min)
                        for sk in frame_skeletons)
        if confirmed:
            records.append(LabeledFrameRecord(
                det.frame, equipment_id, VALID_INTERACTION, SKELETON_CONFIRMED, score, det))
            continue
        weakly_present = any(
            skeleton_verify(sk, det.object_box, margin_px, conf_min_refute)
            for sk in frame_skeletons)
        if weakly_present:
            warnings.append(WarningRow(
                det.frame, equipment_id, WARN_AMBIGUOUS_SKELETON, score, det))
        else:
            records.append(LabeledFrameRecord(
                det.frame, equipment_id, NO_INTERACTION, SKELETON_REFUTED, score, det))
    return PartitionResult(tuple(records), tuple(warnings))


def sample_review_rows(result: PartitionResult, n: int, hi_score: float,
                       seed: int = 0) -> list[WarningRow | LabeledFrameRecord]:
    """Pick `n` rows for manual review: warning rows first, then the
    labeled rows closest to the decision threshold.  Deterministic for a
    given seed."""
    rng = random.Random(seed)
    pool: list[WarningRow | LabeledFrameRecord] = list(result.warnings)
    rng.shuffle(pool)
    if len(pool) < n:
        by_margin = sorted(result.records, key=lambda r: (abs(r.score - hi_score),
                                                          r.frame, r.equipment_id))
        pool.extend(by_margin[:n - len(pool)])
    return pool[:n]
