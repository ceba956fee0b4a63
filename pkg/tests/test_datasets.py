import math
from pathlib import Path

import numpy as np
import pytest

from posenav import datasets as ds
from posenav.posecore import Pose, Position, Quaternion, quat_to_matrix

FIXTURE = Path(__file__).parent / "data" / "colmap"


def load_fixture():
    return ds.parse_colmap_text(
        FIXTURE / "cameras.txt", FIXTURE / "images.txt", FIXTURE / "points3D.txt"
    )


def models_equal(a: ds.SparseModel, b: ds.SparseModel) -> bool:
    if set(a.cameras) != set(b.cameras) or set(a.images) != set(b.images):
        return False
    if set(a.points) != set(b.points):
        return False
    for cid in a.cameras:
        if a.cameras[cid] != b.cameras[cid]:
            return False
    for iid in a.images:
        ia, ib = a.images[iid], b.images[iid]
        if ia.rotation != ib.rotation or not np.array_equal(ia.translation, ib.translation):
            return False
        if (ia.camera_id, ia.name, ia.points2d) != (ib.camera_id, ib.name, ib.points2d):
            return False
    for pid in a.points:
        pa, pb = a.points[pid], b.points[pid]
        if (pa.position, pa.color, pa.error, pa.track) != (pb.position, pb.color, pb.error, pb.track):
            return False
    return True


class TestParseColmap:
    def test_fixture_contents(self):
        m = load_fixture()
        assert set(m.cameras) == {1, 2}
        assert m.cameras[2].fx == m.cameras[2].fy == 525.0
        assert set(m.images) == {1, 2, 3}
        assert m.images[1].rotation == Quaternion.identity()
        assert m.images[1].points2d == [(100.0, 200.0, 1), (300.0, 400.0, 2)]
        assert m.images[3].points2d == []
        assert m.images[3].name == "seq2/frame001.png"
        assert set(m.points) == {1, 2}
        assert m.points[1].track == [(1, 0), (2, 0)]

    def test_unit_quaternion_passthrough(self):
        m = load_fixture()
        q = m.images[2].rotation
        # (0.5, 0.5, 0.5, 0.5) is already unit: components survive exactly
        assert (q.w, q.x, q.y, q.z) == (0.5, 0.5, 0.5, 0.5)
        assert abs(math.sqrt(q.w**2 + q.x**2 + q.y**2 + q.z**2) - 1.0) < 1e-9

    def test_roundtrip_identity(self, tmp_path):
        m = load_fixture()
        ds.write_colmap_text(
            m, tmp_path / "cameras.txt", tmp_path / "images.txt", tmp_path / "points3D.txt"
        )
        m2 = ds.parse_colmap_text(
            tmp_path / "cameras.txt", tmp_path / "images.txt", tmp_path / "points3D.txt"
        )
        assert models_equal(m, m2)

    def test_truncated_image_row(self, tmp_path):
        (tmp_path / "cameras.txt").write_text("1 PINHOLE 0 0 1.0 1.0 0.0 0.0\n")
        (tmp_path / "images.txt").write_text("1 1.0 0.0 0.0 0.0 0.0 0.0 1 a.png\n\n")
        (tmp_path / "points3D.txt").write_text("")
        with pytest.raises(ds.ColmapParseError) as err:
            ds.parse_colmap_text(
                tmp_path / "cameras.txt", tmp_path / "images.txt", tmp_path / "points3D.txt"
            )
        assert ":1:" in str(err.value)
        assert err.value.line_no == 1

    def test_unknown_camera_model(self, tmp_path):
        (tmp_path / "cameras.txt").write_text("1 OPENCV_FISHEYE 0 0 1 1 0 0 0 0 0 0\n")
        (tmp_path / "images.txt").write_text("")
        (tmp_path / "points3D.txt").write_text("")
        with pytest.raises(ds.UnsupportedCameraModelError) as err:
            ds.parse_colmap_text(
                tmp_path / "cameras.txt", tmp_path / "images.txt", tmp_path / "points3D.txt"
            )
        assert "OPENCV_FISHEYE" in str(err.value)

    def test_bad_float_reports_line(self, tmp_path):
        (tmp_path / "cameras.txt").write_text(
            "# header\n1 PINHOLE 0 0 1.0 1.0 0.0 0.0\n"
        )
        (tmp_path / "images.txt").write_text(
            "1 1.0 0.0 0.0 0.0 0.0 0.0 0.0 1 a.png\n1.0 oops 3\n"
        )
        (tmp_path / "points3D.txt").write_text("")
        with pytest.raises(ds.ColmapParseError) as err:
            ds.parse_colmap_text(
                tmp_path / "cameras.txt", tmp_path / "images.txt", tmp_path / "points3D.txt"
            )
        assert err.value.line_no == 2

    def test_missing_trailing_observations(self, tmp_path):
        (tmp_path / "cameras.txt").write_text("1 PINHOLE 0 0 1.0 1.0 0.0 0.0\n")
        (tmp_path / "images.txt").write_text("1 1.0 0.0 0.0 0.0 0.0 0.0 0.0 1 a.png\n")
        (tmp_path / "points3D.txt").write_text("")
        with pytest.raises(ds.ColmapParseError):
            ds.parse_colmap_text(
                tmp_path / "cameras.txt", tmp_path / "images.txt", tmp_path / "points3D.txt"
            )


def synthetic_model(n_images, seed=0):
    rng = np.random.default_rng(seed)
    cameras = {1: ds.CameraIntrinsics(500.0, 500.0, 320.0, 240.0)}
    images = {}
    for i in range(1, n_images + 1):
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        images[i] = ds.ColmapImage(
            Quaternion(*q), rng.normal(size=3), 1, f"seq{i % 7}/frame{i:05d}.png"
        )
    points = {}
    return ds.SparseModel(cameras, images, points)


class TestModelToDataset:
    def test_identity_pose(self):
        m = load_fixture()
        d = ds.model_to_dataset(m, 0.34, seed=1)
        sample = next(s for s in d.samples if s.observation == "seq1/frame001.png")
        np.testing.assert_allclose(sample.pose.position.as_array(), [0, 0, 0])
        assert sample.pose.rotation == Quaternion.identity()

    def test_camera_centre_conversion(self):
        # t = (0, 0, 5), R = I => camera centre -R^T t = (0, 0, -5)
        m = load_fixture()
        m.images = {
            1: ds.ColmapImage(Quaternion.identity(), np.array([0.0, 0.0, 5.0]), 1, "a"),
            2: ds.ColmapImage(Quaternion.identity(), np.array([1.0, 0.0, 0.0]), 1, "b"),
        }
        d = ds.model_to_dataset(m, 0.5, seed=0)
        sample = next(s for s in d.samples if s.observation == "a")
        np.testing.assert_allclose(sample.pose.position.as_array(), [0, 0, -5], atol=1e-12)

    def test_uwa_lab_sized_split(self):
        # 3288 images at test fraction 0.304 -> the 2288 / 1000 split
        m = synthetic_model(3288)
        d = ds.model_to_dataset(m, 0.304, seed=3)
        assert len(d.test_idx) == 1000
        assert len(d.train_idx) == 2288

    def test_split_disjoint_covering_reproducible(self):
        m = synthetic_model(100)
        a = ds.model_to_dataset(m, 0.3, seed=42)
        b = ds.model_to_dataset(m, 0.3, seed=42)
        c = ds.model_to_dataset(m, 0.3, seed=43)
        assert a.train_idx == b.train_idx and a.test_idx == b.test_idx
        assert a.test_idx != c.test_idx
        assert sorted(a.train_idx + a.test_idx) == list(range(100))

    def test_sequence_split_keeps_groups_together(self):
        m = synthetic_model(140)
        d = ds.model_to_dataset(m, 0.3, seed=5, split="sequence")
        test_groups = {ds._sequence_key(m.images[i + 1].name) for i in d.test_idx}
        train_groups = {ds._sequence_key(m.images[i + 1].name) for i in d.train_idx}
        assert not (test_groups & train_groups)

    def test_empty_model(self):
        m = ds.SparseModel({}, {}, {})
        with pytest.raises(ds.EmptyModelError):
            ds.model_to_dataset(m, 0.3, seed=0)

    def test_quaternions_normalized(self):
        m = synthetic_model(25)
        d = ds.model_to_dataset(m, 0.2, seed=0)
        for s in d.samples:
            q = s.pose.rotation
            assert abs(math.sqrt(q.w**2 + q.x**2 + q.y**2 + q.z**2) - 1) < 1e-9
            assert q.w >= 0


class TestSevenScenesPose:
    def test_identity(self, tmp_path):
        f = tmp_path / "pose.txt"
        f.write_text("1 0 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n")
        pose = ds.parse_7scenes_pose(f)
        assert pose.position == Position(0, 0, 0)
        assert pose.rotation == Quaternion.identity()

    def test_pure_translation(self, tmp_path):
        f = tmp_path / "pose.txt"
        f.write_text("1 0 0 0\n0 1 0 0\n0 0 1 1\n0 0 0 1\n")
        pose = ds.parse_7scenes_pose(f)
        np.testing.assert_allclose(pose.position.as_array(), [0, 0, 1])
        assert pose.rotation == Quaternion.identity()

    def test_small_drift_reorthonormalized(self, tmp_path):
        R = np.eye(3)
        R[0, 1] = 1e-5
        f = tmp_path / "pose.txt"
        rows = [
            f"{float(R[i, 0])!r} {float(R[i, 1])!r} {float(R[i, 2])!r} 0.0"
            for i in range(3)
        ]
        f.write_text("\n".join(rows) + "\n0 0 0 1\n")
        pose = ds.parse_7scenes_pose(f)
        M = quat_to_matrix(pose.rotation)
        assert np.max(np.abs(M.T @ M - np.eye(3))) < 1e-9

    def test_large_drift_rejected(self, tmp_path):
        f = tmp_path / "pose.txt"
        f.write_text("1 0.2 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1\n")
        with pytest.raises(ds.CorruptPoseError):
            ds.parse_7scenes_pose(f)

    def test_wrong_count_rejected(self, tmp_path):
        f = tmp_path / "pose.txt"
        f.write_text("1 0 0 0 1\n")
        with pytest.raises(ds.CorruptPoseError):
            ds.parse_7scenes_pose(f)


class TestReconStats:
    def test_empty(self):
        stats = ds.recon_stats(ds.SparseModel({}, {}, {}), {})
        assert stats == ds.ReconStats(0, 0.0, 0, 0.0, 0)

    def test_single_pair(self):
        m = load_fixture()
        stats = ds.recon_stats(m, {(1, 2): 10})
        assert stats.registered_images == 3
        assert stats.matched_pairs == 1
        assert stats.mean_matches_per_pair == 10.0
        assert stats.mean_sift_per_image == pytest.approx(1.0)  # (2 + 1 + 0) / 3
        assert stats.reconstructed_points == 2


class TestManifest:
    def test_roundtrip(self, tmp_path):
        m = synthetic_model(12)
        d = ds.model_to_dataset(m, 0.25, seed=9)
        path = tmp_path / "manifest.json"
        ds.save_manifest(d, path)
        d2 = ds.load_manifest(path)
        assert d2.name == d.name
        assert d2.train_idx == d.train_idx and d2.test_idx == d.test_idx
        for a, b in zip(d.samples, d2.samples):
            assert a.observation == b.observation
            assert a.pose == b.pose

    def test_vector_observations(self, tmp_path):
        samples = [
            ds.SceneSample(np.array([1.0, 2.0]), Pose(Position(0, 0, 0), Quaternion.identity()))
        ]
        d = ds.SceneDataset("v", samples, [0], [], (np.zeros(3), np.ones(3)))
        path = tmp_path / "m.json"
        ds.save_manifest(d, path)
        d2 = ds.load_manifest(path)
        np.testing.assert_allclose(d2.samples[0].observation, [1.0, 2.0])

    def test_overlapping_split_rejected(self):
        with pytest.raises(ValueError):
            ds.SceneDataset("x", [], [0, 1], [1, 2], (np.zeros(3), np.ones(3)))
