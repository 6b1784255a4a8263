from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from teia.errors import SynthSpecError
from teia.io import write_session
from teia.mapping import VerbMapping, build_score_series
from teia.synth import SynthSpec, generate_session, oracle_segment, oracle_smooth


def spec(**kwargs) -> SynthSpec:
    defaults = dict(frame_count=50, fps=Fraction(10), equipment=("mv1", "iv1"),
                    gt_intervals={"mv1": ((10, 30),), "iv1": ((5, 15), (35, 45))},
                    base_score=0.1, active_boost=0.7, noise_sigma=0.0, seed=0)
    defaults.update(kwargs)
    return SynthSpec(**defaults)


class TestSynthSpec:
    @pytest.mark.parametrize("kwargs", [
        dict(base_score=-0.1),
        dict(base_score=0.5, active_boost=0.6),
        dict(noise_sigma=-1),
        dict(equipment=()),
        dict(equipment=("a", "a")),
        dict(gt_intervals={"ghost": ((0, 1),)}),
        dict(gt_intervals={"mv1": ((5, 5),)}),
        dict(gt_intervals={"mv1": ((0, 10), (5, 20))}),
        dict(gt_intervals={"mv1": ((0, 60),)}),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(SynthSpecError):
            spec(**kwargs)


class TestGenerateSession:
    def test_noiseless_construction(self):
        bundle = generate_session(spec(seed=5))
        series = build_score_series(bundle, VerbMapping(), 0.5)
        inside = 0.1 + 0.7
        mv = series["mv1"].values
        assert np.all(mv[10:30] == inside)
        assert np.all(mv[:10] == 0.1) and np.all(mv[30:] == 0.1)

    def test_annotations_match_gt(self):
        bundle = generate_session(spec())
        got = sorted((a.equipment_id, a.start_s, a.end_s) for a in bundle.annotations)
        assert got == [("iv1", Fraction(1, 2), Fraction(3, 2)),
                       ("iv1", Fraction(7, 2), Fraction(9, 2)),
                       ("mv1", Fraction(1), Fraction(3))]

    def test_same_seed_byte_identical(self, tmp_path):
        paths_a = write_session(generate_session(spec(noise_sigma=0.1, seed=9)),
                                tmp_path / "a")
        paths_b = write_session(generate_session(spec(noise_sigma=0.1, seed=9)),
                                tmp_path / "b")
        for role in paths_a:
            a = open(paths_a[role], "rb").read()
            b = open(paths_b[role], "rb").read()
            assert a == b, role

    def test_seed_changes_noise_not_gt(self):
        b1 = generate_session(spec(noise_sigma=0.1, seed=1))
        b2 = generate_session(spec(noise_sigma=0.1, seed=2))
        assert b1.annotations == b2.annotations
        assert b1.detections != b2.detections

    def test_noise_statistics(self):
        # the mean of the clamp-free noisy scores should sit near the
        # construction value within 3 sigma / sqrt(n)
        n = 4000
        s = spec(frame_count=n, equipment=("mv1",), gt_intervals={},
                 base_score=0.5, active_boost=0.2, noise_sigma=0.05, seed=123)
        bundle = generate_session(s)
        series = build_score_series(bundle, VerbMapping(), 0.5)
        mean = series["mv1"].values.mean()
        assert abs(mean - 0.5) < 3 * 0.05 / math.sqrt(n)

    def test_alarms_and_fixations_consistent(self):
        bundle = generate_session(spec())
        for alarm in bundle.alarms:
            spans = [(a.start_s, a.end_s) for a in bundle.annotations
                     if a.equipment_id == alarm.equipment_id]
            assert any(s - 2 <= alarm.onset_s <= s for s, _ in spans)
            assert any(s <= alarm.resolved_s <= e for s, e in spans)
        starts = [f.start_s for f in bundle.fixations]
        assert starts == sorted(starts)


class TestOracles:
    def test_constant_through_oracle_smooth(self):
        out = oracle_smooth([0.4] * 30, sigma=2.0, radius=6)
        assert np.allclose(out, 0.4, atol=1e-12)

    def test_oracle_segment_of_zeros(self):
        assert oracle_segment([0.0] * 10, 0.5, 1) == []

    def test_oracle_segment_run_to_end(self):
        got = oracle_segment([0, 1, 1], 0.5, 1)
        assert [(iv.start_s, iv.end_s) for iv in got] == [(1, 3)]
