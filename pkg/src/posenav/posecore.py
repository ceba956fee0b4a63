"""Pose algebra: quaternions, rigid transforms, projection, view directions.

Conventions shared by every module in this package:

* Cameras look along -z in their own frame, y up.
* ``RigidTransform`` maps world points into the camera frame: c = R w + t.
* ``Pose`` stores a camera-to-world placement: ``position`` is the camera
  centre in world coordinates and ``rotation`` rotates camera-frame vectors
  into world frame.
* Quaternions are stored (w, x, y, z), unit norm, canonical sign w >= 0.
* Angles are radians internally; degrees appear only at I/O boundaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-9


class NotProjectableError(ValueError):
    """Point is behind the camera plane or on it (camera z >= 0)."""


def _require_finite(name, *values):
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"{name} must be finite, got {v!r}")


@dataclass(frozen=True)
class Position:
    """A point in world or camera coordinates, scene units."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        _require_finite("Position", self.x, self.y, self.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Position":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class Quaternion:
    """Unit quaternion (w, x, y, z), normalized and sign-canonicalized.

    Construction normalizes and flips the sign so that w >= 0 (and, when
    w is exactly zero, so that the first non-zero vector component is
    positive).  The Euclidean quaternion distance used by the losses is
    sign-sensitive, so a canonical representative is fixed once here.
    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        _require_finite("Quaternion", self.w, self.x, self.y, self.z)
        n = math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if n < 1e-12:
            raise ValueError("zero-norm quaternion")
        if abs(n - 1.0) <= 1e-12:
            # already unit: skip the division so serialized values round-trip
            w, x, y, z = self.w, self.x, self.y, self.z
        else:
            w, x, y, z = self.w / n, self.x / n, self.y / n, self.z / n
        if w < 0:
            w, x, y, z = -w, -x, -y, -z
        elif w == 0.0:
            for c in (x, y, z):
                if c != 0.0:
                    if c < 0:
                        x, y, z = -x, -y, -z
                    break
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "z", z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z], dtype=float)

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        a = np.asarray(a, dtype=float)
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))

    @classmethod
    def from_yaw_pitch(cls, yaw: float, pitch: float) -> "Quaternion":
        """Rotation about world y by ``yaw`` then camera x by ``pitch`` (radians)."""
        # Hamilton product qy * qx with qy = (cw, 0, sy, 0), qx = (cx, sx, 0, 0)
        cw, sy = math.cos(yaw / 2), math.sin(yaw / 2)
        cx, sx = math.cos(pitch / 2), math.sin(pitch / 2)
        return cls(cw * cx, cw * sx, sy * cx, -sy * sx)

    def conjugate(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def dot(self, other: "Quaternion") -> float:
        return (
            self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
        )


@dataclass(frozen=True)
class Pose:
    """Camera placement: centre in world coordinates plus camera-to-world rotation."""

    position: Position
    rotation: Quaternion


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        _require_finite("CameraIntrinsics", self.fx, self.fy, self.cx, self.cy)
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class RigidTransform:
    """World-to-camera map c = R w + t with orthonormal R, det(R) = 1."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(3)
        if R.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if not np.all(np.isfinite(R)) or not np.all(np.isfinite(t)):
            raise ValueError("non-finite transform")
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-8:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > 1e-8:
            raise ValueError("rotation determinant is not +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(np.eye(3), np.zeros(3))


def quat_to_matrix(q: Quaternion) -> np.ndarray:
    """Rotation matrix of a unit quaternion (w, x, y, z)."""
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ],
        dtype=float,
    )


def matrix_to_quat(R: np.ndarray) -> Quaternion:
    """Unit quaternion of an orthonormal rotation matrix (Shepperd's method)."""
    R = np.asarray(R, dtype=float)
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0:
        s = math.sqrt(tr + 1.0) * 2
        w = 0.25 * s
        x = (R[2, 1] - R[1, 2]) / s
        y = (R[0, 2] - R[2, 0]) / s
        z = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] > R[1, 1] and R[0, 0] > R[2, 2]:
        s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2
        w = (R[2, 1] - R[1, 2]) / s
        x = 0.25 * s
        y = (R[0, 1] + R[1, 0]) / s
        z = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] > R[2, 2]:
        s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2
        w = (R[0, 2] - R[2, 0]) / s
        x = (R[0, 1] + R[1, 0]) / s
        y = 0.25 * s
        z = (R[1, 2] + R[2, 1]) / s
    else:
        s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2
        w = (R[1, 0] - R[0, 1]) / s
        x = (R[0, 2] + R[2, 0]) / s
        y = (R[1, 2] + R[2, 1]) / s
        z = 0.25 * s
    return Quaternion(w, x, y, z)


def nearest_rotation(M: np.ndarray) -> np.ndarray:
    """Orthonormal matrix closest to M in Frobenius norm (SVD projection)."""
    U, _, Vt = np.linalg.svd(np.asarray(M, dtype=float))
    D = np.diag([1.0, 1.0, np.linalg.det(U @ Vt)])
    return U @ D @ Vt


def world_to_camera(T: RigidTransform, w: Position) -> Position:
    c = T.rotation @ w.as_array() + T.translation
    return Position.from_array(c)


def camera_to_world(T: RigidTransform, c: Position) -> Position:
    w = T.rotation.T @ (c.as_array() - T.translation)
    return Position.from_array(w)


def pose_vector(T: RigidTransform) -> np.ndarray:
    """World-space viewing direction of a world-to-camera transform.

    The camera faces -z in its own frame; mapping that axis back through the
    inverse transform (and dropping the translation common to both endpoints)
    leaves R^T (0, 0, -1), returned unit-norm.
    """
    v = T.rotation.T @ np.array([0.0, 0.0, -1.0])
    return v / np.linalg.norm(v)


def view_direction(pose: Pose) -> np.ndarray:
    """World-space viewing direction of a camera-to-world pose."""
    v = quat_to_matrix(pose.rotation) @ np.array([0.0, 0.0, -1.0])
    return v / np.linalg.norm(v)


def transform_from_pose(pose: Pose) -> RigidTransform:
    """World-to-camera transform of a camera-to-world pose."""
    Rcw = quat_to_matrix(pose.rotation)
    R = Rcw.T
    t = -R @ pose.position.as_array()
    return RigidTransform(R, t)


def pose_from_transform(T: RigidTransform) -> Pose:
    """Camera-to-world pose of a world-to-camera transform (centre = -R^T t)."""
    centre = -T.rotation.T @ T.translation
    return Pose(Position.from_array(centre), matrix_to_quat(T.rotation.T))


def project(K: CameraIntrinsics, T: RigidTransform, w: Position) -> tuple[float, float]:
    """Pixel coordinates of a world point; -z is the viewing direction.

    Raises NotProjectableError when the point lies on or behind the camera
    plane (camera z >= 0).
    """
    c = T.rotation @ w.as_array() + T.translation
    if c[2] >= 0.0:
        raise NotProjectableError(f"point at camera z = {c[2]:g} is not projectable")
    u = K.fx * (c[0] / c[2]) + K.cx
    v = K.fy * (c[1] / c[2]) + K.cy
    return float(u), float(v)


def rotational_error_deg(q1: Quaternion, q2: Quaternion) -> float:
    """Angle in degrees between two rotations, insensitive to quaternion sign."""
    d = min(1.0, abs(q1.dot(q2)))
    return math.degrees(2.0 * math.acos(d))


def angle_between(a: np.ndarray, b: np.ndarray) -> float:
    """Angle in [0, pi] between two non-zero vectors."""
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na < 1e-15 or nb < 1e-15:
        raise ValueError("angle_between requires non-zero vectors")
    c = float(np.dot(a, b) / (na * nb))
    return math.acos(max(-1.0, min(1.0, c)))
