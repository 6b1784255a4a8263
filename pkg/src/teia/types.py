"""Core domain types for one recorded training session.

Times are exact rationals (`fractions.Fraction`) measured in seconds, and
frame rates are exact rationals in frames per second, so frame <-> seconds
conversion never accumulates float error.  Floats passed into constructors
are interpreted through their shortest decimal form (``0.1`` means 1/10,
not the nearest binary double), which matches what a human wrote in a data
file.  Scores and box coordinates stay ordinary floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional

from .errors import MissingReferenceError, ValidationError

EQUIPMENT_LABELS = ("IV", "MV", "ProPaq", "patient")

VALID_INTERACTION = "valid_interaction"
NO_INTERACTION = "no_interaction"


def as_seconds(value, field_name: str = "seconds") -> Fraction:
    """Coerce a number or string to an exact rational number of seconds."""
    if isinstance(value, bool):
        raise ValidationError("expected a number of seconds", field_name)
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValidationError("seconds must be finite", field_name)
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"cannot parse {value!r} as seconds", field_name)
    raise ValidationError(f"cannot interpret {type(value).__name__} as seconds", field_name)


def as_fps(value, field_name: str = "fps") -> Fraction:
    fps = as_seconds(value, field_name)
    if fps <= 0:
        raise ValidationError("fps must be positive", field_name)
    return fps


def frame_time(frame: int, fps: Fraction) -> Fraction:
    """Exact timestamp of `frame` in seconds (t = frame / fps)."""
    return Fraction(frame) / fps


def _check_unit(value: float, field_name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or not math.isfinite(value):
        raise ValidationError("must be in [0, 1]", field_name)
    return value


@dataclass(frozen=True)
class SessionMeta:
    session_id: str
    camera_id: str
    fps: Fraction
    frame_count: int

    def __post_init__(self):
        if not self.session_id:
            raise ValidationError("must be nonempty", "session_id")
        object.__setattr__(self, "fps", as_fps(self.fps))
        if not isinstance(self.frame_count, int) or self.frame_count < 0:
            raise ValidationError("must be a nonnegative integer", "frame_count")

    @property
    def duration_s(self) -> Fraction:
        return frame_time(self.frame_count, self.fps)


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box in pixel coordinates, corners (x1, y1) <= (x2, y2)."""

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self):
        for name in ("x1", "y1", "x2", "y2"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v < 0:
                raise ValidationError("must be finite and >= 0", name)
            object.__setattr__(self, name, v)
        if self.x1 > self.x2:
            raise ValidationError("x1 must not exceed x2", "x1")
        if self.y1 > self.y2:
            raise ValidationError("y1 must not exceed y2", "y1")

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    @property
    def center(self) -> tuple[float, float]:
        return (self.x1 + self.x2) / 2.0, (self.y1 + self.y2) / 2.0

    def contains(self, x: float, y: float) -> bool:
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2

    def expand(self, margin: float) -> "BoundingBox":
        return BoundingBox(
            max(0.0, self.x1 - margin), max(0.0, self.y1 - margin),
            self.x2 + margin, self.y2 + margin,
        )


@dataclass(frozen=True)
class DetectionRecord:
    """One candidate human-object pair in one frame.

    `verbs` maps verb name to classification probability; unknown verb names
    are preserved so the relevance filter happens downstream.
    """

    frame: int
    human_box: BoundingBox
    object_box: BoundingBox
    object_class: str
    object_conf: float
    verbs: Mapping[str, float]
    human_conf: float = 1.0
    trainee_id: Optional[str] = None

    def __post_init__(self):
        if not isinstance(self.frame, int) or self.frame < 0:
            raise ValidationError("must be a nonnegative integer", "frame")
        object.__setattr__(self, "object_conf", _check_unit(self.object_conf, "object_conf"))
        object.__setattr__(self, "human_conf", _check_unit(self.human_conf, "human_conf"))
        if not self.verbs:
            raise ValidationError("must be nonempty", "verbs")
        verbs = {}
        for name, p in self.verbs.items():
            verbs[str(name)] = _check_unit(p, f"verbs[{name}]")
        object.__setattr__(self, "verbs", verbs)


@dataclass(frozen=True)
class EquipmentRegion:
    """Configured spatial zone an object detection can be matched against."""

    equipment_id: str
    label: str
    box: BoundingBox
    camera_id: str
    fov_box: Optional[BoundingBox] = None

    def __post_init__(self):
        if not self.equipment_id:
            raise ValidationError("must be nonempty", "equipment_id")
        if self.label not in EQUIPMENT_LABELS:
            raise ValidationError(
                f"must be one of {EQUIPMENT_LABELS}, got {self.label!r}", "label")

    @property
    def effective_fov(self) -> BoundingBox:
        return self.fov_box if self.fov_box is not None else self.box


@dataclass(frozen=True)
class AnnotationInterval:
    """Expert-annotated interaction span, in seconds."""

    equipment_id: str
    start_s: Fraction
    end_s: Fraction
    trainee_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "start_s", as_seconds(self.start_s, "start_s"))
        object.__setattr__(self, "end_s", as_seconds(self.end_s, "end_s"))
        if self.start_s < 0:
            raise ValidationError("must be >= 0", "start_s")
        if not self.start_s < self.end_s:
            raise ValidationError("must exceed start_s", "end_s")


@dataclass(frozen=True)
class AlarmEvent:
    alarm_id: str
    equipment_id: str
    onset_s: Fraction
    resolved_s: Optional[Fraction] = None
    false_alarm: bool = False

    def __post_init__(self):
        object.__setattr__(self, "onset_s", as_seconds(self.onset_s, "onset_s"))
        if self.resolved_s is not None:
            object.__setattr__(self, "resolved_s", as_seconds(self.resolved_s, "resolved_s"))
            if not self.resolved_s > self.onset_s:
                raise ValidationError("must exceed onset_s", "resolved_s")


@dataclass(frozen=True)
class FixationEvent:
    """A sustained gaze on `target` (an equipment_id or \"other\")."""

    start_s: Fraction
    end_s: Fraction
    target: str
    trainee_id: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "start_s", as_seconds(self.start_s, "start_s"))
        object.__setattr__(self, "end_s", as_seconds(self.end_s, "end_s"))
        if not self.start_s < self.end_s:
            raise ValidationError("must exceed start_s", "end_s")
        if not self.target:
            raise ValidationError("must be nonempty", "target")


@dataclass(frozen=True)
class Interval:
    """Predicted interaction span for one equipment region."""

    equipment_id: str
    start_s: Fraction
    end_s: Fraction
    peak_score: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "start_s", as_seconds(self.start_s, "start_s"))
        object.__setattr__(self, "end_s", as_seconds(self.end_s, "end_s"))
        if not self.start_s < self.end_s:
            raise ValidationError("must exceed start_s", "end_s")
        object.__setattr__(self, "peak_score", _check_unit(self.peak_score, "peak_score"))


@dataclass(frozen=True)
class SessionBundle:
    """All validated inputs for one (session, camera) recording."""

    meta: SessionMeta
    detections: tuple[DetectionRecord, ...]
    regions: tuple[EquipmentRegion, ...]
    annotations: Optional[tuple[AnnotationInterval, ...]] = None
    alarms: Optional[tuple[AlarmEvent, ...]] = None
    fixations: Optional[tuple[FixationEvent, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "detections", tuple(self.detections))
        object.__setattr__(self, "regions", tuple(self.regions))
        for name in ("annotations", "alarms", "fixations"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        self._validate()

    def _validate(self):
        seen_ids = set()
        for region in self.regions:
            if region.equipment_id in seen_ids:
                raise ValidationError(
                    f"duplicate region {region.equipment_id!r}", "regions.equipment_id")
            seen_ids.add(region.equipment_id)

        last_frame = -1
        for det in self.detections:
            if det.frame < last_frame:
                raise ValidationError("detections must be sorted by frame", "detections")
            last_frame = det.frame
            if det.frame >= self.meta.frame_count:
                raise ValidationError(
                    f"frame {det.frame} >= frame_count {self.meta.frame_count}", "frame")

        def check_ref(eq_id: str, field_name: str, allow_other: bool = False):
            if allow_other and eq_id == "other":
                return
            if eq_id not in seen_ids:
                raise MissingReferenceError(
                    f"unknown equipment_id {eq_id!r}", field_name)

        for ann in self.annotations or ():
            check_ref(ann.equipment_id, "annotations.equipment_id")
        for alarm in self.alarms or ():
            check_ref(alarm.equipment_id, "alarms.equipment_id")
        for fix in self.fixations or ():
            check_ref(fix.target, "fixations.target", allow_other=True)

        by_trainee: dict[Optional[str], list[FixationEvent]] = {}
        for fix in self.fixations or ():
            by_trainee.setdefault(fix.trainee_id, []).append(fix)
        for trainee, fixes in by_trainee.items():
            fixes = sorted(fixes, key=lambda f: (f.start_s, f.end_s))
            for prev, cur in zip(fixes, fixes[1:]):
                if cur.start_s < prev.end_s:
                    raise ValidationError(
                        f"overlapping fixations for trainee {trainee!r}", "fixations")

    def region_map(self) -> dict[str, EquipmentRegion]:
        return {r.equipment_id: r for r in self.regions}
