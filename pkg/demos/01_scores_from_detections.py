"""From raw detections to per-equipment interaction scores.

A detector emits candidate human-object pairs per frame: two boxes, an
object class guess, and a verb probability distribution.  This demo builds
a tiny session by hand and walks the mapping chain: IoU region matching,
verb filtering, best-HOI selection, and the stacked score series.
"""

from fractions import Fraction

from teia import (
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    SessionBundle,
    SessionMeta,
    VerbMapping,
    build_score_series,
    iou,
    map_detections,
    select_best_hoi,
)

iv_pump = EquipmentRegion("iv-pump", "IV", BoundingBox(100, 50, 220, 260), "cam-1")
ventilator = EquipmentRegion("vent", "MV", BoundingBox(400, 80, 560, 300), "cam-1")

# The detector mislabels the IV pump as a "suitcase", but its box lands on
# the configured region, so the class label does not matter.
reach_for_pump = DetectionRecord(
    frame=3,
    human_box=BoundingBox(60, 40, 200, 400),
    object_box=BoundingBox(110, 60, 225, 250),
    object_class="suitcase",
    object_conf=0.74,
    verbs={"hold": 0.81, "watch": 0.30, "ride": 0.02},
)
glance_at_vent = DetectionRecord(
    frame=3,
    human_box=BoundingBox(300, 60, 460, 420),
    object_box=BoundingBox(405, 90, 555, 290),
    object_class="tv",
    object_conf=0.66,
    verbs={"watch": 0.88, "hold": 0.05},
)

print("IoU of the mislabeled box against the IV region:",
      round(iou(reach_for_pump.object_box, iv_pump.box), 3))

mapping = VerbMapping()  # hold/carry = interaction, watch/no_interaction = none
for name, det in [("reach_for_pump", reach_for_pump), ("glance_at_vent", glance_at_vent)]:
    label, score = select_best_hoi(det, mapping)
    print(f"{name}: best relevant verb gives ({label}, {score:.3f})")

meta = SessionMeta("demo-session", "cam-1", Fraction(10), 8)
bundle = SessionBundle(meta=meta, detections=(reach_for_pump, glance_at_vent),
                       regions=(iv_pump, ventilator))

print("\nMapped HOIs (the line-delimited debug stream carries these):")
for hoi in map_detections(bundle, mapping, iou_min=0.5):
    print(f"  frame {hoi.frame}: {hoi.equipment_id} {hoi.label} "
          f"score={hoi.score:.3f} iou={hoi.iou:.2f}")

series = build_score_series(bundle, mapping, iou_min=0.5)
print("\nScore series (one value per frame, max valid score per equipment):")
for eq, s in series.items():
    print(f"  {eq}: {[round(float(v), 3) for v in s.values]}")
print("\nThe glance contributes 0: watching is not an interaction.")
