"""Deriving training-performance metrics grouped under the task taxonomy.

Builds a session with alarms, gaze fixations, and interaction intervals,
computes every derivable metric (alarm reaction time, response time,
resolution success, gaze dwell, field-of-view entries, ...), and prints
the grouped after-action-review rendering.
"""

from fractions import Fraction

from teia import (
    AlarmEvent,
    BoundingBox,
    DetectionRecord,
    EquipmentRegion,
    FixationEvent,
    Interval,
    SessionBundle,
    SessionMeta,
    build_assessment,
)
from teia.io import write_report

meta = SessionMeta("scenario-12", "cam-1", Fraction(10), 6000)
regions = (
    EquipmentRegion("vent", "MV", BoundingBox(0, 0, 100, 100), "cam-1"),
    EquipmentRegion("iv-pump", "IV", BoundingBox(200, 0, 300, 100), "cam-1"),
    EquipmentRegion("bed", "patient", BoundingBox(400, 0, 600, 200), "cam-1"),
)

# trainee hands near the ventilator for the first ~20 s
human = BoundingBox(10, 10, 40, 90)
detections = tuple(DetectionRecord(f, human, human, "person", 1.0, {"hold": 0.6})
                   for f in range(0, 200))

alarms = (
    AlarmEvent("spo2-low", "vent", onset_s=45, resolved_s=80),
    AlarmEvent("line-occlusion", "iv-pump", onset_s=240, resolved_s=300),
)

bundle = SessionBundle(meta=meta, detections=detections, regions=regions,
                       alarms=alarms,
                       fixations=(
                           FixationEvent(47, 52, "vent"),
                           FixationEvent(52.1, 60, "vent"),
                           FixationEvent(243, 250, "iv-pump"),
                       ))

intervals = [
    Interval("vent", 58, 85),       # reaction to the first alarm
    Interval("iv-pump", 250, 295),  # reaction to the second
    Interval("bed", 120, 160),      # patient contact
]

report = build_assessment(bundle, intervals)
print(write_report(report, "table-text").decode())
