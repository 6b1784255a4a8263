from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import meta
from teia.errors import EmptyInputError, NoGroundTruthError
from teia.evaluation import (
    Confusion,
    evaluate_session,
    f1,
    false_interval_stats,
    frame_confusion,
    macro_f1,
    overlap_ratio,
    pooled_report,
    start_latency,
)
from teia.synth import oracle_confusion
from teia.types import AnnotationInterval, Interval


def pred(*spans, eq="iv1"):
    return [Interval(eq, a, b) for a, b in spans]


def gt(*spans, eq="iv1"):
    return [AnnotationInterval(eq, a, b) for a, b in spans]


class TestFrameConfusion:
    def test_identical(self):
        m = meta(fps=1, frame_count=8)
        c = frame_confusion(pred((2, 4)), gt((2, 4)), m)
        assert (c.fp, c.fn) == (0, 0)
        assert c.tp == 2 and c.tn == 6

    def test_shifted_by_one(self):
        # gt frames {2,3}, pred frames {3,4} out of 8
        m = meta(fps=1, frame_count=8)
        c = frame_confusion(pred((3, 5)), gt((2, 4)), m)
        assert (c.tp, c.fp, c.fn, c.tn) == (1, 1, 1, 5)

    def test_empty_both(self):
        m = meta(fps=1, frame_count=7)
        c = frame_confusion([], [], m)
        assert (c.tp, c.fp, c.fn, c.tn) == (0, 0, 0, 7)

    def test_total_equals_frame_count(self):
        m = meta(fps=3, frame_count=50)
        c = frame_confusion(pred((0.4, 2.0), (9.5, 11.0)), gt((1.0, 10.0)), m)
        assert c.tp + c.fp + c.fn + c.tn == 50

    @settings(deadline=None, max_examples=50)
    @given(data=st.data())
    def test_matches_per_frame_oracle(self, data):
        frame_count = data.draw(st.integers(1, 60))
        fps = Fraction(data.draw(st.integers(1, 30)), data.draw(st.integers(1, 3)))
        m = meta(fps=fps, frame_count=frame_count)
        horizon = float(frame_count / fps)

        def draw_spans():
            out = []
            for _ in range(data.draw(st.integers(0, 4))):
                a = data.draw(st.floats(0, horizon * 0.9))
                b = data.draw(st.floats(0.01, horizon * 0.5))
                out.append((Fraction(repr(a)), Fraction(repr(a)) + Fraction(repr(b))))
            return out

        p, g = pred(*draw_spans()), gt(*draw_spans())
        assert frame_confusion(p, g, m) == oracle_confusion(p, g, frame_count, fps)


class TestF1:
    def test_hand_arithmetic(self):
        scores = f1(Confusion(tp=2, fp=1, fn=1))
        assert scores.precision == pytest.approx(66.67, abs=0.01)
        assert scores.recall == pytest.approx(66.67, abs=0.01)
        assert scores.f1 == pytest.approx(66.67, abs=0.01)

    def test_zero_over_zero_convention(self):
        assert f1(Confusion()) == f1(Confusion(tn=10))
        assert f1(Confusion()).f1 == 0.0

    def test_perfect(self):
        assert f1(Confusion(tp=5, tn=5)).f1 == 100.0

    def test_consistency_with_equation(self):
        c = Confusion(tp=7, fp=3, fn=2, tn=1)
        s = f1(c)
        p, r = s.precision / 100, s.recall / 100
        assert s.f1 == pytest.approx(2 * p * r / (p + r) * 100)


class TestMacroF1:
    def test_paper_style_mean(self):
        assert macro_f1([94.7, 84.4, 82.5]) == pytest.approx(87.2, abs=1e-9)

    def test_single_value(self):
        assert macro_f1([42.5]) == 42.5

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            macro_f1([])


class TestOverlapRatio:
    def test_full_cover(self):
        assert overlap_ratio(pred((5, 25)), gt((10, 20))) == 1.0

    def test_partial(self):
        assert overlap_ratio(pred((12, 22)), gt((10, 20))) == pytest.approx(0.8)

    def test_disjoint(self):
        assert overlap_ratio(pred((30, 40)), gt((10, 20))) == 0.0

    def test_no_ground_truth(self):
        with pytest.raises(NoGroundTruthError):
            overlap_ratio(pred((0, 1)), [])

    def test_split_invariance(self):
        whole = overlap_ratio(pred((12, 22)), gt((10, 20)))
        split = overlap_ratio(pred((12, 15), (15, 22)), gt((10, 14), (14, 20)))
        assert whole == split


class TestFalseIntervalStats:
    def test_identity(self):
        stats = false_interval_stats(pred((10, 20)), gt((10, 20)))
        assert (stats.false_count, stats.false_duration_pct) == (0, 0.0)

    def test_fixture(self):
        stats = false_interval_stats(pred((12, 18), (30, 31)), gt((10, 20)))
        assert stats.false_count == 1
        assert stats.false_duration_pct == pytest.approx(100 / 7, abs=1e-9)

    def test_empty_pred(self):
        stats = false_interval_stats([], gt((10, 20)))
        assert (stats.false_count, stats.false_duration_pct) == (0, 0.0)

    def test_touching_counts_as_false(self):
        stats = false_interval_stats(pred((20, 30)), gt((10, 20)))
        assert stats.false_count == 1
        assert stats.false_duration_pct == 100.0

    def test_cutoff(self):
        # 25% of the prediction overlaps ground truth
        p, g = pred((18, 22)), gt((10, 19))
        assert false_interval_stats(p, g).false_count == 0
        assert false_interval_stats(p, g, overlap_cutoff=0.25).false_count == 1

    def test_split_invariance(self):
        a = false_interval_stats(pred((12, 22)), gt((10, 20)))
        b = false_interval_stats(pred((12, 17), (17, 22)), gt((10, 20)))
        assert a.false_duration_pct == b.false_duration_pct

    def test_count_bounded_by_pred(self):
        p = pred((0, 1), (2, 3), (4, 5))
        assert false_interval_stats(p, gt((10, 20))).false_count == len(p)


class TestStartLatency:
    def test_aligned(self):
        assert start_latency(pred((10, 19)), gt((10, 20))) == 0.0

    def test_paper_style_fixture(self):
        got = start_latency(pred((10.28, 19)), gt((10, 20)))
        assert got == pytest.approx(0.28, abs=1e-9)

    def test_no_overlap_is_none(self):
        assert start_latency(pred((30, 40)), gt((10, 20))) is None

    def test_early_prediction_clamps_to_zero(self):
        assert start_latency(pred((8, 15)), gt((10, 20))) == 0.0

    def test_earliest_overlapping_start_wins(self):
        got = start_latency(pred((11, 12), (13, 14)), gt((10, 20)))
        assert got == pytest.approx(1.0)

    def test_mean_over_gt(self):
        got = start_latency(pred((11, 12), (32, 33)), gt((10, 20), (30, 40)))
        assert got == pytest.approx(1.5)


class TestOrderInvariance:
    def test_metrics_ignore_interval_order(self):
        p = pred((30, 31), (12, 18))
        g = gt((25, 26), (10, 20))
        assert overlap_ratio(p, g) == overlap_ratio(p[::-1], g[::-1])
        assert false_interval_stats(p, g) == false_interval_stats(p[::-1], g[::-1])
        assert start_latency(p, g) == start_latency(p[::-1], g[::-1])


class TestPooledReport:
    def test_single_session_matches_direct_ops(self):
        m = meta(fps=1, frame_count=40)
        p = {"iv1": pred((12, 18), (30, 31))}
        g = {"iv1": gt((10, 20))}
        report = evaluate_session(m, p, g)
        eq = report.per_equipment["iv1"]
        assert eq.overlap_ratio == pytest.approx(0.6)
        assert eq.false_count == 1.0
        assert eq.false_duration_pct == pytest.approx(100 / 7)
        assert eq.start_latency_s == pytest.approx(2.0)
        scores = f1(frame_confusion(p["iv1"], g["iv1"], m))
        assert eq.f1 == scores.f1
        assert report.macro_f1 == eq.f1
        assert report.per_session == {"s1": {"iv1": eq}}

    def test_multi_session_pooling(self):
        s1 = (10, Fraction(1), {"iv1": pred((0, 5))}, {"iv1": gt((0, 5))})
        s2 = (10, Fraction(1), {"iv1": pred((0, 4), (6, 7))}, {"iv1": gt((0, 8))})
        report = pooled_report([s1, s2], session_ids=["a", "b"])
        eq = report.per_equipment["iv1"]
        # durations pool: intersection 5+5=10, gt 5+8=13
        assert eq.overlap_ratio == pytest.approx(float(Fraction(10, 13)))
        # false counts average per session: (0 + 0)/2 ... second session's
        # (6,7) overlaps gt, so no false intervals at all
        assert eq.false_count == 0.0
        assert set(report.per_session) == {"a", "b"}

    def test_equipment_without_data_skipped(self):
        s = (10, Fraction(1), {"iv1": [], "mv1": pred((0, 2), eq="mv1")},
             {"iv1": [], "mv1": []})
        report = pooled_report([s])
        assert set(report.per_equipment) == {"mv1"}

    def test_pred_only_equipment_scores_zero_f1(self):
        s = (10, Fraction(1), {"mv1": pred((0, 2), eq="mv1")}, {})
        report = pooled_report([s])
        eq = report.per_equipment["mv1"]
        assert eq.f1 == 0.0
        assert eq.overlap_ratio is None
        assert eq.false_count == 1.0
