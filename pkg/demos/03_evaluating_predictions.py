"""Scoring predicted intervals against expert annotations.

Frame-level precision/recall/F1 with the macro average across equipment,
plus the temporal metrics: overlap ratio, falsely predicted interval
count, false prediction duration, and start latency.  Ends with the
table-text rendering used in reports.
"""

from fractions import Fraction

from teia import (
    AnnotationInterval,
    Interval,
    SessionMeta,
    evaluate_session,
    f1,
    frame_confusion,
    overlap_ratio,
)
from teia.io import write_report

meta = SessionMeta("demo", "cam-1", Fraction(10), 1200)

gt = {
    "IV": [AnnotationInterval("IV", 10, 35), AnnotationInterval("IV", 60, 90)],
    "MV": [AnnotationInterval("MV", 20, 70)],
}
pred = {
    "IV": [Interval("IV", 11, 34), Interval("IV", 61, 88)],
    "MV": [Interval("MV", 24, 66), Interval("MV", 100, 103)],  # one spurious
}

for eq in gt:
    confusion = frame_confusion(pred[eq], gt[eq], meta)
    scores = f1(confusion)
    print(f"{eq}: {confusion}  ->  P={scores.precision:.1f}% "
          f"R={scores.recall:.1f}% F1={scores.f1:.1f}")
    print(f"    overlap ratio = {overlap_ratio(pred[eq], gt[eq]):.3f}")

report = evaluate_session(meta, pred, gt)
print(f"\nmacro F1 across equipment: {report.macro_f1:.1f}")

print("\ntable-text rendering:\n")
print(write_report(report, "table-text").decode())
