"""Semi-automated labeling: thresholds, hand-skeleton arbitration, dedup.

High-scoring mapped detections are labeled directly; low-scoring ones are
confirmed or refuted by hand keypoints; the leftover ambiguous rows go to
human review.  Also shows duplicate-human removal and the auxiliary-
detector merge.
"""

from teia import (
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    SkeletonFrame,
    VerbMapping,
    cluster_dedup,
    merge_aux_humans,
    partition_labels,
)
from teia.labeling import sample_review_rows

region = EquipmentRegion("vent", "MV", BoundingBox(0, 0, 100, 100), "cam-1")


def det(frame, hold):
    return DetectionRecord(frame, BoundingBox(0, 0, 50, 50), region.box,
                           "appliance", 1.0, {"hold": hold})


detections = [
    det(0, 0.93),   # confident: labeled outright
    det(1, 0.35),   # weak, hand on the object: confirmed
    det(2, 0.35),   # weak, hands far away: refuted
    det(3, 0.35),   # weak, no skeleton data: review
    det(4, 0.35),   # weak, hand seen only at low confidence: review
]
skeletons = [
    SkeletonFrame(1, ((40.0, 40.0, 0.9),)),
    SkeletonFrame(2, ((900.0, 900.0, 0.9),)),
    SkeletonFrame(4, ((40.0, 40.0, 0.35),)),
]

result = partition_labels(detections, skeletons, hi_score=0.8,
                          mapping=VerbMapping(), regions=[region])
print("labels:")
for rec in result.records:
    print(f"  frame {rec.frame}: {rec.label:18s} via {rec.provenance}")
print("review queue:")
for row in result.warnings:
    print(f"  frame {row.frame}: {row.reason}")

print("\nsampled rows for manual verb correction:")
for row in sample_review_rows(result, n=2, hi_score=0.8, seed=1):
    print(f"  frame {row.frame} (score {row.score})")

print("\nduplicate-human cleanup:")
humans = [(BoundingBox(10, 10, 110, 210), 0.9),
          (BoundingBox(12, 12, 112, 212), 0.7),   # duplicate of the first
          (BoundingBox(300, 10, 400, 210), 0.8)]
kept = cluster_dedup(humans, iou_cluster=0.7)
print(f"  {len(humans)} boxes -> {len(kept)} after clustering")

aux = [BoundingBox(11, 11, 111, 211),    # duplicate, dropped
       BoundingBox(500, 10, 600, 210)]   # genuinely new, recovered
merged = merge_aux_humans([b for b, _ in kept], aux, iou_dup=0.5)
print(f"  auxiliary detector adds {len(merged) - len(kept)} missed human(s)")
