import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from posenav import pathmetrics as pm
from posenav.posecore import Pose, Position, Quaternion


def pose_at(x=0.0, y=0.0, z=0.0, yaw_deg=0.0, pitch_deg=0.0):
    q = Quaternion.from_yaw_pitch(math.radians(yaw_deg), math.radians(pitch_deg))
    return Pose(Position(x, y, z), q)


def trace_of(poses, rate=30.0):
    times = np.arange(len(poses)) / rate
    return pm.PathTrace(times, list(poses))


class TestPathTrace:
    def test_rejects_non_increasing_times(self):
        with pytest.raises(ValueError):
            pm.PathTrace(np.array([0.0, 0.0]), [pose_at(), pose_at()])

    def test_csv_roundtrip(self, tmp_path):
        trace = trace_of([pose_at(x=i * 0.1, yaw_deg=10 * i) for i in range(5)])
        path = tmp_path / "trace.csv"
        pm.write_trace_csv(path, trace)
        back = pm.load_trace_csv(path)
        assert len(back) == 5
        np.testing.assert_array_equal(back.times, trace.times)
        assert back.poses == trace.poses


class TestXzSpread:
    def test_identical_samples(self):
        trace = trace_of([pose_at(x=1.0, z=2.0)] * 4)
        assert pm.xz_spread(trace) == 0.0

    def test_two_sample_hand_value(self):
        # mean (1, 0); radial deviations 1 + 1; normalizer N - 1 = 1 => 2.0
        trace = trace_of([pose_at(x=0.0, z=0.0), pose_at(x=2.0, z=0.0)])
        assert pm.xz_spread(trace) == pytest.approx(2.0)

    def test_needs_two_samples(self):
        with pytest.raises(ValueError):
            pm.xz_spread(trace_of([pose_at()]))

    @settings(max_examples=60)
    @given(st.integers(0, 2**32 - 1), st.floats(0.1, 50.0))
    def test_homogeneous_and_translation_invariant(self, seed, k):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=(6, 2))
        base = trace_of([pose_at(x=p[0], z=p[1]) for p in pts])
        scaled = trace_of([pose_at(x=k * p[0], z=k * p[1]) for p in pts])
        shifted = trace_of([pose_at(x=p[0] + 3.3, z=p[1] - 1.1) for p in pts])
        s = pm.xz_spread(base)
        assert pm.xz_spread(scaled) == pytest.approx(k * s, rel=1e-9)
        assert pm.xz_spread(shifted) == pytest.approx(s, rel=1e-9)


class TestYawOf:
    def test_identity_faces_zero(self):
        assert pm.yaw_of(pose_at()) == pytest.approx(0.0)

    def test_quarter_turn_about_y(self):
        assert pm.yaw_of(pose_at(yaw_deg=90)) == pytest.approx(90.0)

    def test_wraps_to_range(self):
        assert pm.yaw_of(pose_at(yaw_deg=-90)) == pytest.approx(270.0)

    def test_vertical_view_rejected(self):
        with pytest.raises(pm.UndefinedYawError):
            pm.yaw_of(pose_at(pitch_deg=90))

    @settings(max_examples=80)
    @given(st.floats(-1000, 1000))
    def test_periodic(self, yaw):
        a = pm.yaw_of(pose_at(yaw_deg=yaw))
        b = pm.yaw_of(pose_at(yaw_deg=yaw + 360))
        assert a == pytest.approx(b, abs=1e-6)


class TestYawHistogram:
    def test_exactly_uniform(self):
        poses = [pose_at(yaw_deg=b * 10 + 5) for b in range(36) for _ in range(10)]
        hist = pm.yaw_histogram(trace_of(poses))
        assert hist.counts.sum() == 360
        assert hist.std == 0.0
        assert hist.mean == pytest.approx(10.0)

    def test_spiked_bin_filtered(self):
        poses = [pose_at(yaw_deg=b * 10 + 5) for b in range(36) for _ in range(10)]
        poses += [pose_at(yaw_deg=5)] * 90  # spike bin 0 to 10x
        hist = pm.yaw_histogram(trace_of(poses))
        assert hist.counts[0] == 100
        assert not hist.kept_bins[0]
        assert hist.filtered_std < 0.1 * hist.std
        assert hist.filtered_mean == pytest.approx(10.0)

    def test_bin_edges_left_closed(self):
        poses = [pose_at(yaw_deg=359.999)] * 20 + [pose_at(yaw_deg=360.0)] * 16
        hist = pm.yaw_histogram(trace_of(poses))
        assert hist.counts[35] == 20
        assert hist.counts[0] == 16  # 360 wraps to bin 0

    def test_counts_conserved(self):
        rng = np.random.default_rng(0)
        poses = [pose_at(yaw_deg=y) for y in rng.uniform(0, 360, size=100)]
        hist = pm.yaw_histogram(trace_of(poses))
        assert hist.counts.sum() == 100


class TestLineFit:
    def test_collinear(self):
        poses = [pose_at(x=i * 1.0, z=2.0 * i + 1.0) for i in range(5)]
        total, per_sample, fit = pm.line_fit_residuals(trace_of(poses))
        assert total == pytest.approx(0.0, abs=1e-18)
        assert per_sample == pytest.approx(0.0, abs=1e-18)

    def test_three_point_hand_case(self):
        poses = [pose_at(x=0, z=0), pose_at(x=1, z=1), pose_at(x=2, z=0)]
        total, per_sample, fit = pm.line_fit_residuals(trace_of(poses))
        assert total == pytest.approx(2.0 / 3.0, abs=1e-12)
        assert per_sample == pytest.approx(2.0 / 9.0, abs=1e-12)
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.intercept == pytest.approx(1.0 / 3.0)

    def test_near_vertical_fits_x_on_z(self):
        rng = np.random.default_rng(1)
        poses = [pose_at(x=0.01 * rng.normal(), z=float(i)) for i in range(10)]
        _, _, fit = pm.line_fit_residuals(trace_of(poses))
        assert fit.dependent == "x"

    def test_degenerate(self):
        with pytest.raises(pm.DegeneratePathError):
            pm.line_fit_residuals(trace_of([pose_at()] * 4))

    def test_permutation_invariant(self):
        rng = np.random.default_rng(2)
        pts = rng.normal(size=(12, 2))
        base = [pose_at(x=p[0], z=p[1]) for p in pts]
        total, _, _ = pm.line_fit_residuals(trace_of(base))
        for _ in range(50):
            perm = rng.permutation(len(base))
            shuffled = [base[i] for i in perm]
            t2, _, _ = pm.line_fit_residuals(trace_of(shuffled))
            assert t2 == pytest.approx(total, rel=1e-9)


class TestYawConcentration:
    def test_constant_yaw(self):
        mean, std = pm.yaw_concentration(trace_of([pose_at(yaw_deg=90)] * 5))
        assert mean == pytest.approx(90.0)
        assert std == pytest.approx(0.0, abs=1e-6)

    def test_wraparound_mean(self):
        mean, _ = pm.yaw_concentration(
            trace_of([pose_at(yaw_deg=359), pose_at(yaw_deg=1)])
        )
        assert min(mean, 360 - mean) == pytest.approx(0.0, abs=1e-9)

    def test_uniform_circle_undefined(self):
        poses = [pose_at(yaw_deg=i * 90.0) for i in range(4)]
        with pytest.raises(pm.UndefinedMeanError):
            pm.yaw_concentration(trace_of(poses))

    @settings(max_examples=50)
    @given(st.floats(0, 359.9), st.integers(-3, 3))
    def test_periodicity(self, yaw, k):
        mean, _ = pm.yaw_concentration(
            trace_of([pose_at(yaw_deg=yaw), pose_at(yaw_deg=yaw + k * 360)])
        )
        diff = abs(mean - yaw % 360.0)
        assert min(diff, 360.0 - diff) < 1e-6


class TestCompoundReport:
    def test_single_arrow_for_full_stride(self):
        poses = [pose_at(x=i * 0.01, yaw_deg=45) for i in range(16)]
        report = pm.compound_path_report(trace_of(poses), stride=16)
        assert len(report.arrows) == 1
        assert report.arrows[0][2] == pytest.approx(45.0)

    def test_constant_pose_no_flags(self):
        poses = [pose_at(x=1.0, z=1.0)] * 8
        report = pm.compound_path_report(trace_of(poses), stride=4)
        assert report.speed_flags == []
        assert np.allclose(report.xz, report.xz[0])

    def test_teleport_flagged(self):
        poses = [pose_at(x=i * 0.001) for i in range(10)]
        poses[6] = pose_at(x=5.0)  # jump far beyond max_speed / 30
        report = pm.compound_path_report(trace_of(poses), stride=5, max_speed=1.0)
        assert 6 in report.speed_flags

    def test_reports_written(self, tmp_path):
        rng = np.random.default_rng(3)
        spin = trace_of([pose_at(yaw_deg=i * 9.7 % 360) for i in range(40)])
        pm.write_spin_report(tmp_path / "spin.csv", tmp_path / "spin.svg", spin)
        line = trace_of([pose_at(x=i * 0.1, z=0.02 * rng.normal()) for i in range(20)])
        pm.write_line_report(tmp_path / "line.csv", tmp_path / "line.svg", line)
        comp = trace_of([pose_at(x=i * 0.01, yaw_deg=i * 3.0) for i in range(40)])
        pm.write_compound_report(tmp_path / "c.csv", tmp_path / "c.svg", comp)
        for name in ("spin.csv", "spin.svg", "line.csv", "line.svg", "c.csv", "c.svg"):
            assert (tmp_path / name).exists()
