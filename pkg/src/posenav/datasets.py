"""Pose-labelled dataset ingestion.

Covers three external formats:

* COLMAP sparse-model text exports (cameras.txt / images.txt / points3D.txt).
  COLMAP stores world-to-camera rotations and translations; conversion to
  world poses (centre = -R^T t, rotation = R^T) is centralized here.
* 4x4 homogeneous pose matrices, one per text file, as used by 7Scenes-style
  datasets (read as camera-to-world, metres).
* A JSON dataset manifest (name, extent, samples, split) for everything the
  package produces itself.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .posecore import (
    CameraIntrinsics,
    Pose,
    Position,
    Quaternion,
    matrix_to_quat,
    nearest_rotation,
    quat_to_matrix,
)


class ColmapParseError(ValueError):
    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


class UnsupportedCameraModelError(ValueError):
    def __init__(self, path, line_no, model):
        super().__init__(f"{path}:{line_no}: unsupported camera model {model!r}")
        self.model = model


class CorruptPoseError(ValueError):
    pass


class EmptyModelError(ValueError):
    pass


@dataclass
class ColmapImage:
    rotation: Quaternion  # world-to-camera
    translation: np.ndarray  # world-to-camera, 3-vector
    camera_id: int
    name: str
    points2d: list = field(default_factory=list)  # (x, y, point3d_id or -1)


@dataclass
class ColmapPoint:
    position: Position
    color: tuple[int, int, int]
    error: float
    track: list = field(default_factory=list)  # (image_id, point2d_idx)


@dataclass
class SparseModel:
    cameras: dict[int, CameraIntrinsics]
    images: dict[int, ColmapImage]
    points: dict[int, ColmapPoint]


@dataclass
class SceneSample:
    """One dataset entry: a feature vector or an observation reference."""

    observation: object  # np.ndarray or str
    pose: Pose


@dataclass
class SceneDataset:
    name: str
    samples: list[SceneSample]
    train_idx: list[int]
    test_idx: list[int]
    extent: tuple[np.ndarray, np.ndarray]  # (mins, maxs) of positions

    def __post_init__(self):
        overlap = set(self.train_idx) & set(self.test_idx)
        if overlap:
            raise ValueError(f"train/test splits overlap: {sorted(overlap)[:5]}")

    def train_samples(self):
        return [self.samples[i] for i in self.train_idx]

    def test_samples(self):
        return [self.samples[i] for i in self.test_idx]

    def extent_diagonal(self) -> float:
        mins, maxs = self.extent
        return float(np.linalg.norm(maxs - mins))


@dataclass(frozen=True)
class ReconStats:
    registered_images: int
    mean_sift_per_image: float
    matched_pairs: int
    mean_matches_per_pair: float
    reconstructed_points: int


def _extent_of(positions) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(positions, dtype=float).reshape(-1, 3)
    return arr.min(axis=0), arr.max(axis=0)


# ---------------------------------------------------------------------------
# COLMAP text model
# ---------------------------------------------------------------------------

_PINHOLE_MODELS = {"PINHOLE": 4, "SIMPLE_PINHOLE": 3}


def _data_lines(path):
    with open(path, "r") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield line_no, line


def _parse_floats(path, line_no, fields, what):
    try:
        return [float(f) for f in fields]
    except ValueError as exc:
        raise ColmapParseError(path, line_no, f"bad {what}: {exc}") from None


def parse_colmap_text(cameras_path, images_path, points_path) -> SparseModel:
    """Parse a COLMAP sparse-model text export.

    images.txt uses the two-line-per-image layout (pose line, observations
    line).  '#' comment lines are skipped; only pinhole and simple-pinhole
    camera rows are accepted.
    """
    cameras: dict[int, CameraIntrinsics] = {}
    for line_no, line in _data_lines(cameras_path):
        fields = line.split()
        if len(fields) < 4:
            raise ColmapParseError(cameras_path, line_no, "camera row needs >= 4 fields")
        model = fields[1]
        if model not in _PINHOLE_MODELS:
            raise UnsupportedCameraModelError(cameras_path, line_no, model)
        n_params = _PINHOLE_MODELS[model]
        if len(fields) != 4 + n_params:
            raise ColmapParseError(
                cameras_path, line_no, f"{model} camera row needs {4 + n_params} fields"
            )
        try:
            cam_id = int(fields[0])
        except ValueError:
            raise ColmapParseError(cameras_path, line_no, "bad camera id") from None
        params = _parse_floats(cameras_path, line_no, fields[4:], "camera parameters")
        if model == "PINHOLE":
            fx, fy, cx, cy = params
        else:
            fx = fy = params[0]
            cx, cy = params[1], params[2]
        cameras[cam_id] = CameraIntrinsics(fx, fy, cx, cy)

    images: dict[int, ColmapImage] = {}
    pending = None  # image awaiting its observations line
    with open(images_path, "r") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if pending is None:
                if not line or line.startswith("#"):
                    continue
                fields = line.split()
                if len(fields) < 10:
                    raise ColmapParseError(
                        images_path, line_no, f"image row needs 10 fields, got {len(fields)}"
                    )
                try:
                    image_id = int(fields[0])
                    camera_id = int(fields[8])
                except ValueError:
                    raise ColmapParseError(images_path, line_no, "bad image/camera id") from None
                qw, qx, qy, qz, tx, ty, tz = _parse_floats(
                    images_path, line_no, fields[1:8], "image pose"
                )
                name = " ".join(fields[9:])
                if camera_id not in cameras:
                    raise ColmapParseError(
                        images_path, line_no, f"image references unknown camera {camera_id}"
                    )
                pending = (
                    image_id,
                    ColmapImage(
                        Quaternion(qw, qx, qy, qz), np.array([tx, ty, tz]), camera_id, name
                    ),
                )
            else:
                # observations line; may be empty but not a comment
                if line.startswith("#"):
                    raise ColmapParseError(
                        images_path, line_no, "comment where observations line expected"
                    )
                fields = line.split()
                if len(fields) % 3 != 0:
                    raise ColmapParseError(
                        images_path, line_no, "observations line length must be a multiple of 3"
                    )
                image_id, image = pending
                for k in range(0, len(fields), 3):
                    x, y = _parse_floats(
                        images_path, line_no, fields[k : k + 2], "observation"
                    )
                    try:
                        pid = int(fields[k + 2])
                    except ValueError:
                        raise ColmapParseError(
                            images_path, line_no, "bad point3d id"
                        ) from None
                    image.points2d.append((x, y, pid))
                images[image_id] = image
                pending = None
    if pending is not None:
        raise ColmapParseError(images_path, 0, "missing observations line for last image")

    points: dict[int, ColmapPoint] = {}
    for line_no, line in _data_lines(points_path):
        fields = line.split()
        if len(fields) < 8 or (len(fields) - 8) % 2 != 0:
            raise ColmapParseError(points_path, line_no, "point row needs 8 + 2k fields")
        try:
            pid = int(fields[0])
            rgb = tuple(int(f) for f in fields[4:7])
        except ValueError:
            raise ColmapParseError(points_path, line_no, "bad point id or color") from None
        x, y, z = _parse_floats(points_path, line_no, fields[1:4], "point position")
        err = _parse_floats(points_path, line_no, fields[7:8], "point error")[0]
        track = []
        for k in range(8, len(fields), 2):
            try:
                track.append((int(fields[k]), int(fields[k + 1])))
            except ValueError:
                raise ColmapParseError(points_path, line_no, "bad track element") from None
        points[pid] = ColmapPoint(Position(x, y, z), rgb, err, track)

    return SparseModel(cameras, images, points)


def write_colmap_text(model: SparseModel, cameras_path, images_path, points_path):
    """Serialize a SparseModel back to COLMAP's text layout."""
    with open(cameras_path, "w") as fh:
        fh.write("# Camera list: CAMERA_ID MODEL WIDTH HEIGHT PARAMS[]\n")
        for cam_id in sorted(model.cameras):
            c = model.cameras[cam_id]
            fh.write(f"{cam_id} PINHOLE 0 0 {c.fx!r} {c.fy!r} {c.cx!r} {c.cy!r}\n")
    with open(images_path, "w") as fh:
        fh.write("# Image list: IMAGE_ID QW QX QY QZ TX TY TZ CAMERA_ID NAME\n")
        for image_id in sorted(model.images):
            im = model.images[image_id]
            q, t = im.rotation, im.translation
            fh.write(
                f"{image_id} {q.w!r} {q.x!r} {q.y!r} {q.z!r} "
                f"{float(t[0])!r} {float(t[1])!r} {float(t[2])!r} {im.camera_id} {im.name}\n"
            )
            fh.write(
                " ".join(f"{float(x)!r} {float(y)!r} {pid}" for x, y, pid in im.points2d)
                + "\n"
            )
    with open(points_path, "w") as fh:
        fh.write("# 3D point list: POINT3D_ID X Y Z R G B ERROR TRACK[]\n")
        for pid in sorted(model.points):
            pt = model.points[pid]
            p = pt.position
            track = " ".join(f"{i} {j}" for i, j in pt.track)
            row = f"{pid} {p.x!r} {p.y!r} {p.z!r} {pt.color[0]} {pt.color[1]} {pt.color[2]} {pt.error!r}"
            fh.write(row + (" " + track if track else "") + "\n")


def _sequence_key(name: str) -> str:
    if "/" in name:
        return name.rsplit("/", 1)[0]
    return re.sub(r"\d+(\.\w+)?$", "", name)


def model_to_dataset(
    model: SparseModel, test_fraction: float, seed: int, split: str = "random"
) -> SceneDataset:
    """World-pose dataset from a sparse model, with a deterministic split.

    split="random" shuffles images with the seed; split="sequence" keeps
    images whose names share a directory (or digit-stripped stem) together.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must be in (0, 1)")
    if not model.images:
        raise EmptyModelError("sparse model contains no images")
    ids = sorted(model.images)
    poses = []
    for image_id in ids:
        im = model.images[image_id]
        R = quat_to_matrix(im.rotation)
        centre = -R.T @ im.translation
        poses.append(Pose(Position.from_array(centre), matrix_to_quat(R.T)))
    samples = [
        SceneSample(model.images[i].name, pose) for i, pose in zip(ids, poses)
    ]
    n = len(ids)
    n_test = min(max(round(test_fraction * n), 1), n - 1)
    rng = np.random.default_rng(seed)
    if split == "random":
        order = rng.permutation(n)
        test = sorted(int(i) for i in order[:n_test])
        train = sorted(int(i) for i in order[n_test:])
    elif split == "sequence":
        groups: dict[str, list[int]] = {}
        for idx, image_id in enumerate(ids):
            groups.setdefault(_sequence_key(model.images[image_id].name), []).append(idx)
        keys = sorted(groups)
        if len(keys) < 2:
            raise ValueError("sequence split needs at least two sequence groups")
        rng.shuffle(keys)
        test, train = [], []
        last_test_group = None
        for key in keys:
            if len(test) < n_test:
                test.extend(groups[key])
                last_test_group = groups[key]
            else:
                train.extend(groups[key])
        if not train:  # every group landed in test; give the last one back
            train = list(last_test_group)
            test = [i for i in test if i not in set(last_test_group)]
        test, train = sorted(test), sorted(train)
    else:
        raise ValueError(f"unknown split {split!r}")
    extent = _extent_of([p.position.as_array() for p in poses])
    return SceneDataset("colmap-model", samples, train, test, extent)


# ---------------------------------------------------------------------------
# 7Scenes-style 4x4 pose matrices
# ---------------------------------------------------------------------------


def parse_7scenes_pose(path) -> Pose:
    """Read one 4x4 homogeneous camera-to-world matrix (16 reals, metres).

    Rotation blocks with small orthonormality drift (> 1e-6) are snapped to
    the nearest rotation; drift beyond 1e-2 raises CorruptPoseError.
    """
    text = Path(path).read_text()
    values = text.split()
    if len(values) != 16:
        raise CorruptPoseError(f"{path}: expected 16 values, found {len(values)}")
    try:
        M = np.array([float(v) for v in values], dtype=float).reshape(4, 4)
    except ValueError as exc:
        raise CorruptPoseError(f"{path}: {exc}") from None
    if not np.all(np.isfinite(M)):
        raise CorruptPoseError(f"{path}: non-finite pose entries")
    R = M[:3, :3]
    drift = float(np.max(np.abs(R.T @ R - np.eye(3))))
    det = float(np.linalg.det(R))
    if drift > 1e-2 or det <= 0:
        raise CorruptPoseError(f"{path}: rotation drift {drift:g} exceeds 1e-2")
    if drift > 1e-6:
        R = nearest_rotation(R)
    return Pose(Position.from_array(M[:3, 3]), matrix_to_quat(R))


# ---------------------------------------------------------------------------
# Reconstruction statistics
# ---------------------------------------------------------------------------


def recon_stats(model: SparseModel, pair_match_counts) -> ReconStats:
    """Summary statistics of a reconstruction, as read off a sparse model.

    pair_match_counts maps matched image pairs to their match counts (any
    mapping, or an iterable of counts).
    """
    counts = (
        list(pair_match_counts.values())
        if hasattr(pair_match_counts, "values")
        else list(pair_match_counts)
    )
    n_images = len(model.images)
    mean_sift = (
        float(np.mean([len(im.points2d) for im in model.images.values()]))
        if n_images
        else 0.0
    )
    mean_matches = float(np.mean(counts)) if counts else 0.0
    return ReconStats(
        registered_images=n_images,
        mean_sift_per_image=mean_sift,
        matched_pairs=len(counts),
        mean_matches_per_pair=mean_matches,
        reconstructed_points=len(model.points),
    )


# ---------------------------------------------------------------------------
# Dataset manifest (JSON)
# ---------------------------------------------------------------------------


def _pose_to_list(pose: Pose):
    p, q = pose.position, pose.rotation
    return [p.x, p.y, p.z, q.w, q.x, q.y, q.z]


def _pose_from_list(vals) -> Pose:
    return Pose(Position(*vals[:3]), Quaternion(*vals[3:7]))


def save_manifest(dataset: SceneDataset, path):
    obs = []
    for s in dataset.samples:
        if isinstance(s.observation, str):
            obs.append(s.observation)
        else:
            obs.append([float(v) for v in np.asarray(s.observation).ravel()])
    payload = {
        "name": dataset.name,
        "extent": {
            "min": [float(v) for v in dataset.extent[0]],
            "max": [float(v) for v in dataset.extent[1]],
        },
        "samples": [
            {"observation": o, "pose": _pose_to_list(s.pose)}
            for o, s in zip(obs, dataset.samples)
        ],
        "split": {"train": list(dataset.train_idx), "test": list(dataset.test_idx)},
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def load_manifest(path) -> SceneDataset:
    with open(path) as fh:
        payload = json.load(fh)
    samples = []
    for entry in payload["samples"]:
        o = entry["observation"]
        observation = o if isinstance(o, str) else np.asarray(o, dtype=float)
        samples.append(SceneSample(observation, _pose_from_list(entry["pose"])))
    extent = (
        np.asarray(payload["extent"]["min"], dtype=float),
        np.asarray(payload["extent"]["max"], dtype=float),
    )
    return SceneDataset(
        payload["name"],
        samples,
        list(payload["split"]["train"]),
        list(payload["split"]["test"]),
        extent,
    )
