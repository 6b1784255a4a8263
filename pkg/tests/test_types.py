from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import bundle, detection, meta, region
from teia.errors import MissingReferenceError, ValidationError
from teia.types import (
    AlarmEvent,
    AnnotationInterval,
    BoundingBox,
    FixationEvent,
    Interval,
    SessionMeta,
    as_seconds,
    frame_time,
)


def err_field(excinfo) -> str:
    return excinfo.value.field


class TestSessionMeta:
    def test_valid(self):
        m = SessionMeta("s1", "cam-1", Fraction(30000, 1001), 100)
        assert m.fps == Fraction(30000, 1001)
        assert m.duration_s == Fraction(100) / Fraction(30000, 1001)

    def test_fps_accepts_decimal_string(self):
        assert SessionMeta("s", "c", "29.97", 0).fps == Fraction(2997, 100)

    @pytest.mark.parametrize("kwargs,field", [
        (dict(session_id=""), "session_id"),
        (dict(fps=0), "fps"),
        (dict(fps=-1), "fps"),
        (dict(frame_count=-1), "frame_count"),
    ])
    def test_invalid(self, kwargs, field):
        base = dict(session_id="s", camera_id="c", fps=10, frame_count=5)
        base.update(kwargs)
        with pytest.raises(ValidationError) as excinfo:
            SessionMeta(**base)
        assert err_field(excinfo) == field


class TestBoundingBox:
    def test_coercion(self):
        b = BoundingBox(0, 1, 2, 3)
        assert (b.x1, b.y1, b.x2, b.y2) == (0.0, 1.0, 2.0, 3.0)
        assert b.area == 4.0
        assert b.center == (1.0, 2.0)

    @pytest.mark.parametrize("coords,field", [
        ((5, 0, 4, 10), "x1"),
        ((0, 5, 10, 4), "y1"),
        ((-1, 0, 10, 10), "x1"),
        ((0, float("nan"), 10, 10), "y1"),
        ((0, 0, float("inf"), 10), "x2"),
    ])
    def test_invalid(self, coords, field):
        with pytest.raises(ValidationError) as excinfo:
            BoundingBox(*coords)
        assert err_field(excinfo) == field

    def test_expand_clamps_at_zero(self):
        b = BoundingBox(2, 2, 10, 10).expand(5)
        assert (b.x1, b.y1, b.x2, b.y2) == (0.0, 0.0, 15.0, 15.0)


class TestDetectionRecord:
    def test_conf_out_of_range_names_field(self):
        with pytest.raises(ValidationError) as excinfo:
            detection(object_conf=1.3)
        assert err_field(excinfo) == "object_conf"

    def test_verb_probability_bounds(self):
        with pytest.raises(ValidationError) as excinfo:
            detection(verbs={"hold": 1.5})
        assert err_field(excinfo) == "verbs[hold]"

    def test_empty_verbs(self):
        with pytest.raises(ValidationError) as excinfo:
            detection(verbs={})
        assert err_field(excinfo) == "verbs"

    def test_unknown_verbs_preserved(self):
        d = detection(verbs={"juggle": 0.4, "hold": 0.2})
        assert set(d.verbs) == {"juggle", "hold"}

    def test_negative_frame(self):
        with pytest.raises(ValidationError) as excinfo:
            detection(frame=-1)
        assert err_field(excinfo) == "frame"


class TestEvents:
    def test_annotation_order(self):
        with pytest.raises(ValidationError) as excinfo:
            AnnotationInterval("iv1", 5, 5)
        assert err_field(excinfo) == "end_s"

    def test_annotation_negative_start(self):
        with pytest.raises(ValidationError) as excinfo:
            AnnotationInterval("iv1", -1, 5)
        assert err_field(excinfo) == "start_s"

    def test_alarm_resolution_after_onset(self):
        with pytest.raises(ValidationError) as excinfo:
            AlarmEvent("a", "iv1", 100, 100)
        assert err_field(excinfo) == "resolved_s"
        assert AlarmEvent("a", "iv1", 100).resolved_s is None

    def test_fixation_order(self):
        with pytest.raises(ValidationError):
            FixationEvent(3, 3, "iv1")

    def test_interval_peak_bounds(self):
        with pytest.raises(ValidationError) as excinfo:
            Interval("iv1", 0, 1, peak_score=1.2)
        assert err_field(excinfo) == "peak_score"


class TestSessionBundle:
    def test_detections_must_fit_frame_count(self):
        with pytest.raises(ValidationError) as excinfo:
            bundle(detections=[detection(frame=100)], frame_count=100)
        assert err_field(excinfo) == "frame"

    def test_unsorted_detections_rejected(self):
        from teia.types import SessionBundle
        with pytest.raises(ValidationError):
            SessionBundle(meta=meta(), detections=(detection(frame=5), detection(frame=2)),
                          regions=(region(),))

    def test_missing_region_reference(self):
        with pytest.raises(MissingReferenceError):
            bundle(annotations=[AnnotationInterval("ghost", 0, 1)])

    def test_fixation_target_other_allowed(self):
        b = bundle(fixations=[FixationEvent(0, 1, "other")])
        assert b.fixations[0].target == "other"

    def test_overlapping_fixations_rejected(self):
        with pytest.raises(ValidationError):
            bundle(fixations=[FixationEvent(0, 2, "iv1"), FixationEvent(1, 3, "iv1")])

    def test_overlap_allowed_across_trainees(self):
        b = bundle(fixations=[FixationEvent(0, 2, "iv1", "t1"),
                              FixationEvent(1, 3, "iv1", "t2")])
        assert len(b.fixations) == 2

    def test_duplicate_regions_rejected(self):
        with pytest.raises(ValidationError):
            bundle(regions=[region("iv1"), region("iv1", x0=500)])


class TestTime:
    @given(frame=st.integers(min_value=0, max_value=10 ** 9),
           num=st.integers(min_value=1, max_value=100000),
           den=st.integers(min_value=1, max_value=100000))
    def test_frame_time_exact_for_rational_fps(self, frame, num, den):
        fps = Fraction(num, den)
        assert frame_time(frame, fps) * fps == frame

    def test_float_coercion_uses_decimal_reading(self):
        assert as_seconds(0.1) == Fraction(1, 10)
        assert as_seconds(10.28) == Fraction(1028, 100)

    def test_string_and_ratio(self):
        assert as_seconds("1/3") == Fraction(1, 3)
        assert as_seconds("2.5") == Fraction(5, 2)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValidationError):
            as_seconds(float("inf"))
        with pytest.raises(ValidationError):
            as_seconds("abc")
