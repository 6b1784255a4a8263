from __future__ import annotations

from fractions import Fraction

import pytest

from conftest import box, bundle, detection, region
from teia.assessment import (
    CtaNode,
    METRIC_KEYS,
    alarm_reaction_time,
    build_assessment,
    default_taxonomy,
    fov_entries,
    gaze_metrics,
    interaction_timestamps,
    non_optimal_interactions,
    per_alarm_resolution_rate,
    resolution_success_rate,
    response_time,
    validate_taxonomy,
)
from teia.errors import TaxonomyError
from teia.types import AlarmEvent, AnnotationInterval, FixationEvent, Interval


def alarm(alarm_id="a1", eq="iv1", onset=100, resolved=None, false_alarm=False):
    return AlarmEvent(alarm_id, eq, onset, resolved, false_alarm)


def iv(start, end, eq="iv1"):
    return Interval(eq, start, end)


SESSION_LEN = 1000


class TestAlarmReactionTime:
    def test_spanning_interval_is_zero(self):
        per_alarm, mean = alarm_reaction_time([alarm(onset=100)], [iv(90, 120)])
        assert per_alarm == {"a1": 0.0}
        assert mean == 0.0

    def test_subtraction(self):
        per_alarm, mean = alarm_reaction_time([alarm(onset=100)], [iv(107, 120)])
        assert per_alarm["a1"] == 7.0
        assert mean == 7.0

    def test_no_interaction_on_equipment(self):
        per_alarm, mean = alarm_reaction_time([alarm()], [iv(107, 120, eq="mv1")])
        assert per_alarm == {"a1": None}
        assert mean is None

    def test_interaction_after_resolution_does_not_count(self):
        per_alarm, _ = alarm_reaction_time(
            [alarm(onset=100, resolved=110)], [iv(115, 120)])
        assert per_alarm["a1"] is None

    def test_earliest_qualifying_interval(self):
        per_alarm, _ = alarm_reaction_time(
            [alarm(onset=100)], [iv(112, 113), iv(105, 106)])
        assert per_alarm["a1"] == 5.0


class TestResponseTime:
    def test_subtraction(self):
        assert response_time([alarm(onset=100, resolved=130)]) == {"a1": 30.0}

    def test_unresolved(self):
        assert response_time([alarm()]) == {"a1": None}


class TestResolutionSuccessRate:
    def test_single_success(self):
        rate = resolution_success_rate(
            [alarm(onset=100, resolved=110)], [iv(105, 112)], 5, SESSION_LEN)
        assert rate == 100.0

    def test_half(self):
        # two overlapping interactions; resolution lands within grace of the
        # second one only
        alarms = [alarm(onset=100, resolved=130)]
        intervals = [iv(100, 105), iv(125, 128)]
        rate = resolution_success_rate(alarms, intervals, 5, SESSION_LEN)
        assert rate == 50.0

    def test_no_overlapping_interactions(self):
        rate = resolution_success_rate([alarm(onset=100, resolved=110)],
                                       [iv(2000, 2001)], 5, 3000)
        assert rate is None

    def test_per_alarm_companion(self):
        alarms = [alarm("a1", onset=100, resolved=130),
                  alarm("a2", onset=500, resolved=600)]
        intervals = [iv(125, 128)]
        assert per_alarm_resolution_rate(alarms, intervals, 5, SESSION_LEN) == 50.0
        assert per_alarm_resolution_rate([], [], 5, SESSION_LEN) is None


class TestNonOptimalInteractions:
    def test_effective_interaction_not_counted(self):
        got = non_optimal_interactions(
            [alarm(onset=100, resolved=112)], [iv(105, 110)], 5, 30, SESSION_LEN)
        assert got == 0

    def test_unresolved_past_grace(self):
        got = non_optimal_interactions(
            [alarm(onset=100)], [iv(105, 110)], 5, 30, SESSION_LEN)
        assert got == 1
        late = non_optimal_interactions(
            [alarm(onset=100, resolved=120)], [iv(105, 110)], 5, 30, SESSION_LEN)
        assert late == 1

    def test_false_alarm_lookahead(self):
        got = non_optimal_interactions(
            [alarm(onset=113, false_alarm=True)], [iv(105, 110)], 5, 10, SESSION_LEN)
        assert got == 1
        out_of_reach = non_optimal_interactions(
            [alarm(onset=125, false_alarm=True)], [iv(105, 110)], 5, 10, SESSION_LEN)
        assert out_of_reach == 0

    def test_double_match_counts_once(self):
        alarms = [alarm("a1", onset=100),
                  alarm("a2", onset=112, false_alarm=True)]
        got = non_optimal_interactions(alarms, [iv(105, 110)], 5, 10, SESSION_LEN)
        assert got == 1


class TestInteractionTimestamps:
    def test_empty(self):
        assert interaction_timestamps([], "IV", [region()]) == []

    def test_patient_filter_identity(self):
        regions = [region("bed", "patient"), region("iv1", "IV", 200)]
        intervals = [iv(5, 6, eq="bed"), iv(1, 2, eq="iv1")]
        assert interaction_timestamps(intervals, "patient", regions) == [(5.0, 6.0)]

    def test_mixed_filter_and_sort(self):
        regions = [region("iv1"), region("iv2", "IV", 200), region("mv1", "MV", 400)]
        intervals = [iv(9, 10, eq="iv2"), iv(1, 2, eq="mv1"), iv(4, 5, eq="iv1")]
        got = interaction_timestamps(intervals, "IV", regions)
        # filter + sort oracle
        want = sorted((float(i.start_s), float(i.end_s)) for i in intervals
                      if i.equipment_id in {"iv1", "iv2"})
        assert got == want == [(4.0, 5.0), (9.0, 10.0)]


class TestFovEntries:
    def test_single_entry(self):
        r = region("iv1")
        dets = [detection(frame=f, human_box=box(10, 10, 20, 20)) for f in range(11)]
        assert fov_entries(dets, r, 0.5, fps=10) == 1

    def test_bridged_gap(self):
        # two presence runs separated by 0.5 s at 25 fps
        r = region("iv1")
        inside = box(10, 10, 20, 20)
        frames = list(range(0, 10)) + list(range(22, 30))
        dets = [detection(frame=f, human_box=inside) for f in frames]
        assert fov_entries(dets, r, 0.5, fps=25, bridge_s=1.0) == 1
        assert fov_entries(dets, r, 0.5, fps=25, bridge_s=0.3) == 2

    def test_never_present(self):
        r = region("iv1")
        dets = [detection(frame=f, human_box=box(5000, 5000, 5010, 5010))
                for f in range(5)]
        assert fov_entries(dets, r, 0.5, fps=10) == 0

    def test_iou_route(self):
        r = region("iv1", fov_box=box(0, 0, 100, 100))
        d = detection(frame=0, human_box=box(0, 0, 100, 60))
        assert fov_entries([d], r, 0.5, fps=10) == 1


class TestGazeMetrics:
    def test_fixation_rate(self):
        got = gaze_metrics([FixationEvent(10, 40, "mv1")], [], 60)
        assert got.fixation_s_per_min == {"mv1": 30.0}

    def test_time_to_first_fixation(self):
        alarms = [alarm(eq="mv1", onset=10)]
        got = gaze_metrics([FixationEvent(14, 16, "mv1")], alarms, 60)
        assert got.time_to_first_fixation_s == {"a1": 4.0}
        assert got.mean_time_to_first_fixation_s == 4.0

    def test_fixation_before_onset_ignored(self):
        alarms = [alarm(eq="mv1", onset=10)]
        got = gaze_metrics([FixationEvent(2, 4, "mv1")], alarms, 60)
        assert got.time_to_first_fixation_s == {"a1": None}

    def test_dwell_runs_and_transitions(self):
        fixes = [FixationEvent(0, 1, "mv1"),
                 FixationEvent(1.1, 2, "mv1"),
                 FixationEvent(2.1, 3, "iv1")]
        got = gaze_metrics(fixes, [], 60)
        assert [t for t, _ in got.dwell_runs] == ["mv1", "iv1"]
        assert got.dwell_runs[0][1] == pytest.approx(2.0)
        assert got.transition_sequences == {"": ("mv1", "iv1")}
        assert got.transition_counts == {"mv1->iv1": 1}

    def test_gap_breaks_dwell_but_not_transition_dedup(self):
        fixes = [FixationEvent(0, 1, "mv1"), FixationEvent(5, 6, "mv1")]
        got = gaze_metrics(fixes, [], 60)
        assert len(got.dwell_runs) == 2
        assert got.transition_sequences == {"": ("mv1",)}
        assert got.transition_counts == {}

    def test_per_trainee_streams(self):
        fixes = [FixationEvent(0, 1, "mv1", "t1"),
                 FixationEvent(0.5, 1.5, "iv1", "t2")]
        got = gaze_metrics(fixes, [], 60)
        assert set(got.transition_sequences) == {"t1", "t2"}


class TestTaxonomy:
    def test_default_is_valid_and_covers_all_keys(self):
        key_map = validate_taxonomy(default_taxonomy())
        assert set(key_map) == set(METRIC_KEYS)

    def test_duplicate_metric_key(self):
        nodes = list(default_taxonomy())
        nodes.append(CtaNode("dup", 5, "Dup", "treat_patient",
                             frozenset({"response_time"})))
        with pytest.raises(TaxonomyError):
            validate_taxonomy(nodes)

    def test_root_must_be_mission(self):
        with pytest.raises(TaxonomyError):
            validate_taxonomy((CtaNode("root", 1, "Root"),))

    def test_levels_strictly_increase(self):
        nodes = (CtaNode("mission", 2, "Mission"),
                 CtaNode("kid", 2, "Kid", "mission"))
        with pytest.raises(TaxonomyError):
            validate_taxonomy(nodes)

    def test_metric_keys_only_on_level5_leaves(self):
        nodes = (CtaNode("mission", 1, "Mission"),
                 CtaNode("mid", 3, "Mid", "mission", frozenset({"response_time"})))
        with pytest.raises(TaxonomyError):
            validate_taxonomy(nodes)

    def test_unknown_parent(self):
        nodes = (CtaNode("mission", 1, "Mission"),
                 CtaNode("kid", 2, "Kid", "ghost"))
        with pytest.raises(TaxonomyError):
            validate_taxonomy(nodes)


def full_bundle():
    regions = [region("iv1"), region("bed", "patient", 200)]
    dets = [detection(frame=f, human_box=box(10, 10, 20, 20)) for f in range(5)]
    return bundle(
        detections=dets,
        regions=regions,
        annotations=(AnnotationInterval("iv1", 1, 3),),
        alarms=(AlarmEvent("a1", "iv1", 1, 2.5),),
        fixations=(FixationEvent(1, 2, "iv1"),),
        frame_count=100, fps=10,
    )


class TestBuildAssessment:
    def test_full_bundle_covers_all_metrics(self):
        report = build_assessment(full_bundle(), [iv(1, 3)])
        assert set(report.metrics) == set(METRIC_KEYS)
        assert report.warnings == ()

    def test_missing_fixations_warns(self):
        b = full_bundle()
        stripped = bundle(
            detections=b.detections, regions=b.regions, annotations=b.annotations,
            alarms=b.alarms, fixations=None, frame_count=100, fps=10)
        report = build_assessment(stripped, [iv(1, 3)])
        assert "gaze_dwell_time" not in report.metrics
        assert any("fixation" in w for w in report.warnings)

    def test_missing_patient_region_warns(self):
        b = bundle(regions=[region("iv1")], frame_count=10, fps=10)
        report = build_assessment(b, [])
        assert "patient_interaction_timestamps" not in report.metrics
        assert any("patient" in w for w in report.warnings)

    def test_unmapped_metric_key_raises(self):
        taxonomy = (CtaNode("mission", 1, "Mission"),
                    CtaNode("leaf", 5, "Leaf", "mission",
                            frozenset({"response_time"})))
        with pytest.raises(TaxonomyError):
            build_assessment(full_bundle(), [iv(1, 3)], taxonomy=taxonomy)

    def test_grouped_tree_carries_values(self):
        report = build_assessment(full_bundle(), [iv(1, 3)])

        def collect(node, out):
            out.update(node.get("metrics", {}))
            for child in node.get("children", []):
                collect(child, out)
            return out

        assert set(collect(report.grouped, {})) == set(report.metrics)


class TestShiftInvariance:
    @pytest.mark.parametrize("delta", [Fraction(-100), Fraction(0), Fraction(3600)])
    def test_alarm_metrics_shift(self, delta):
        alarms = [AlarmEvent("a1", "iv1", 200, 230),
                  AlarmEvent("a2", "iv1", 400, None, True)]
        intervals = [iv(205, 220), iv(402, 405)]
        session_len = Fraction(2000)

        shifted_alarms = [AlarmEvent(a.alarm_id, a.equipment_id, a.onset_s + delta,
                                     None if a.resolved_s is None else a.resolved_s + delta,
                                     a.false_alarm)
                          for a in alarms]
        shifted_intervals = [Interval(i.equipment_id, i.start_s + delta,
                                      i.end_s + delta) for i in intervals]

        base_rt = alarm_reaction_time(alarms, intervals)
        assert alarm_reaction_time(shifted_alarms, shifted_intervals) == base_rt
        assert response_time(shifted_alarms) == response_time(alarms)
        assert (resolution_success_rate(shifted_alarms, shifted_intervals, 5,
                                        session_len + delta)
                == resolution_success_rate(alarms, intervals, 5, session_len))
        assert (non_optimal_interactions(shifted_alarms, shifted_intervals, 5, 30,
                                         session_len + delta)
                == non_optimal_interactions(alarms, intervals, 5, 30, session_len))

    @pytest.mark.parametrize("delta", [Fraction(-100), Fraction(0), Fraction(3600)])
    def test_timestamp_outputs_shift_exactly(self, delta):
        regions = [region("iv1")]
        intervals = [iv(200, 210), iv(500, 501)]
        shifted = [Interval(i.equipment_id, i.start_s + delta, i.end_s + delta)
                   for i in intervals]
        base = interaction_timestamps(intervals, "IV", regions)
        got = interaction_timestamps(shifted, "IV", regions)
        assert got == [(float(Fraction(repr(a)) + delta), float(Fraction(repr(b)) + delta))
                       for a, b in base]

    @pytest.mark.parametrize("delta", [Fraction(-100), Fraction(0), Fraction(3600)])
    def test_gaze_metrics_shift(self, delta):
        fixes = [FixationEvent(200, 210, "iv1"), FixationEvent(210.1, 215, "mv1")]
        alarms = [AlarmEvent("a1", "iv1", 195, 230)]
        session_len = Fraction(600)
        shifted_fixes = [FixationEvent(f.start_s + delta, f.end_s + delta, f.target)
                         for f in fixes]
        shifted_alarms = [AlarmEvent("a1", "iv1", 195 + delta, 230 + delta)]
        base = gaze_metrics(fixes, alarms, session_len)
        got = gaze_metrics(shifted_fixes, shifted_alarms, session_len)
        assert got.fixation_s_per_min == base.fixation_s_per_min
        assert got.time_to_first_fixation_s == base.time_to_first_fixation_s
        assert got.dwell_runs == base.dwell_runs
        assert got.transition_counts == base.transition_counts


class TestReactionResponseOrdering:
    def test_reaction_not_greater_than_response(self):
        alarms = [AlarmEvent("a1", "iv1", 100, 140)]
        intervals = [iv(110, 150)]
        per_alarm, _ = alarm_reaction_time(alarms, intervals)
        responses = response_time(alarms)
        for aid, rt in per_alarm.items():
            if rt is not None and responses[aid] is not None:
                assert rt <= responses[aid]
