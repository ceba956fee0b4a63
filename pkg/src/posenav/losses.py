"""The ten pose-regression loss formulations, with exact weights and
analytic gradients.

Every formulation is a sum of some of these pieces, selected per row id:

* position term      sum_i  omega_i * |p_hat_i - p|
* rotation term      rot_scale * sum_i  beta_i * |q_hat_i - q|
* geometric terms    g1 * |d|^2 * (1 - cos theta)   and   g2 * |d|
* constant term      512 * (1 - cos theta)
* facing term        |d|^2 * (1 - cos alpha)

with d the displacement from the ground-truth position to the head-3
prediction, theta the angle between the ground-truth viewing direction and
d, and alpha the angle between the ground-truth and predicted head-3 viewing
directions (a positions-as-vectors reading of alpha is available through
``alpha_mode="position"``).  Head-indexed terms sum over the three regressor
heads; geometric terms use head 3 only.

Default per-head weights: omega = (0.3, 0.3, 1.0), beta = (150, 150, 500).
Rows 7 and 8 are row 6 with the rotation scale moved from 1.5 to 1.2 / 1.8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .posecore import Pose, quat_to_matrix, view_direction

DEGENERATE_EPS = 1e-12

DEFAULT_OMEGA = (0.3, 0.3, 1.0)
DEFAULT_BETA = (150.0, 150.0, 500.0)

# Per-row term selection: (position, rotation-scale or None, geo |d|^2(1-cos t),
# geo |d|, constant 512(1-cos t), facing |d|^2(1-cos a)).
_ROWS = {
    0: dict(pos=True, rot=1.0, geo1=False, geo2=False, c512=False, alpha=False),
    1: dict(pos=True, rot=1.0, geo1=False, geo2=False, c512=True, alpha=False),
    2: dict(pos=True, rot=1.0, geo1=True, geo2=False, c512=False, alpha=False),
    3: dict(pos=True, rot=1.0, geo1=True, geo2=True, c512=False, alpha=False),
    4: dict(pos=True, rot=1.0, geo1=True, geo2=True, c512=True, alpha=False),
    5: dict(pos=False, rot=1.0, geo1=True, geo2=True, c512=False, alpha=False),
    6: dict(pos=False, rot=1.5, geo1=True, geo2=True, c512=False, alpha=False),
    7: dict(pos=False, rot=1.2, geo1=True, geo2=True, c512=False, alpha=False),
    8: dict(pos=False, rot=1.8, geo1=True, geo2=True, c512=False, alpha=False),
    9: dict(pos=False, rot=None, geo1=True, geo2=True, c512=False, alpha=True),
}

FORMULATION_IDS = tuple(sorted(_ROWS))


@dataclass(frozen=True)
class LossWeights:
    """Hyperparameters of a loss formulation.

    ``rot_scale`` is the scalar in front of the rotation term (1.0 for rows
    0-5, 1.5 / 1.2 / 1.8 for rows 6 / 7 / 8).  ``geo_scales`` weights the
    |d|^2 (1 - cos theta) and |d| terms; both default to 1.0, the values the
    tuning experiments settled on.
    """

    omega: tuple[float, float, float] = DEFAULT_OMEGA
    beta: tuple[float, float, float] = DEFAULT_BETA
    rot_scale: float = 1.0
    geo_scales: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        vals = (*self.omega, *self.beta, self.rot_scale, *self.geo_scales)
        if len(self.omega) != 3 or len(self.beta) != 3 or len(self.geo_scales) != 2:
            raise ValueError("omega/beta need 3 entries, geo_scales needs 2")
        for v in vals:
            if not math.isfinite(v) or v < 0:
                raise ValueError("loss weights must be finite and >= 0")


@dataclass(frozen=True)
class LossFormulation:
    """A row of the formulation table plus its weights."""

    id: int
    weights: LossWeights = field(default_factory=LossWeights)
    alpha_mode: str = "view"  # "view" or "position" reading of alpha

    def __post_init__(self):
        if self.id not in _ROWS:
            raise ValueError(f"unknown loss formulation id {self.id}")
        if self.alpha_mode not in ("view", "position"):
            raise ValueError(f"unknown alpha_mode {self.alpha_mode!r}")

    @classmethod
    def standard(cls, id: int, **overrides) -> "LossFormulation":
        """Formulation with the table's printed constants as defaults."""
        row = _ROWS.get(id)
        if row is None:
            raise ValueError(f"unknown loss formulation id {id}")
        weights = overrides.pop("weights", None)
        if weights is None:
            weights = LossWeights(rot_scale=row["rot"] if row["rot"] else 1.0)
        return cls(id, weights, **overrides)


@dataclass(frozen=True)
class LossInputs:
    """Predictions from the three heads plus the ground truth.

    ``truth_view`` is the world-space viewing direction of the ground-truth
    pose (unit 3-vector).  Quaternions are unit and sign-canonicalized by
    construction of Pose.
    """

    predicted: tuple[Pose, Pose, Pose]
    truth: Pose
    truth_view: np.ndarray

    def __post_init__(self):
        if len(self.predicted) != 3:
            raise ValueError("exactly three predicted poses required")
        v = np.asarray(self.truth_view, dtype=float).reshape(3)
        n = np.linalg.norm(v)
        if not np.isfinite(n) or abs(n - 1.0) > 1e-6:
            raise ValueError("truth_view must be a unit vector")
        object.__setattr__(self, "truth_view", v / n)

    @classmethod
    def from_poses(cls, predicted, truth: Pose) -> "LossInputs":
        return cls(tuple(predicted), truth, view_direction(truth))


@dataclass(frozen=True)
class GeometricTerms:
    """Displacement and angles feeding the geometric loss pieces."""

    d: np.ndarray
    theta: float
    alpha: float


@dataclass
class LossGradient:
    """Partials of the loss w.r.t. the three predicted positions (3x3)
    and the three predicted quaternions (3x4)."""

    position: np.ndarray
    quaternion: np.ndarray


def formula_text(id: int, weights: LossWeights | None = None) -> str:
    """Human-readable formula for a table row, e.g. for the comparison CSV."""
    row = _ROWS.get(id)
    if row is None:
        raise ValueError(f"unknown loss formulation id {id}")
    w = weights or LossWeights(rot_scale=row["rot"] if row["rot"] else 1.0)
    parts = []
    if row["pos"]:
        parts.append("w_i*|dp_i|")
    if row["rot"] is not None:
        scale = w.rot_scale if weights is not None else row["rot"]
        parts.append(f"{scale:g}*b_i*|dq_i|" if scale != 1.0 else "b_i*|dq_i|")
    if row["alpha"]:
        parts.append("|d|^2*(1-cos a)")
    if row["geo1"]:
        g = w.geo_scales[0]
        parts.append(f"{g:g}*|d|^2*(1-cos t)" if g != 1.0 else "|d|^2*(1-cos t)")
    if row["geo2"]:
        g = w.geo_scales[1]
        parts.append(f"{g:g}*|d|" if g != 1.0 else "|d|")
    if row["c512"]:
        parts.append("512*(1-cos t)")
    return " + ".join(parts)


def _stack(inputs: LossInputs):
    P = np.stack([p.position.as_array() for p in inputs.predicted])
    Q = np.stack([p.rotation.as_array() for p in inputs.predicted])
    p = inputs.truth.position.as_array()
    q = inputs.truth.rotation.as_array()
    return P, Q, p, q, inputs.truth_view


def _pred_view(qv: np.ndarray) -> tuple[np.ndarray, float]:
    """Viewing direction of a quaternion given as a raw 4-vector.

    Uses the homogeneous form R(q / |q|)^T (0,0,-1) so the expression stays
    smooth under free perturbation of the components (finite differences).
    Returns (unnormalized direction u, squared norm N) with view = u / N.
    """
    w, x, y, z = qv
    u = np.array([2 * (w * y - x * z), -2 * (w * x + y * z), x * x + y * y - w * w - z * z])
    N = w * w + x * x + y * y + z * z
    return u, N


def geometric_terms(inputs: LossInputs) -> GeometricTerms:
    """Displacement d, angle theta between the truth view direction and d,
    and angle alpha between the truth and predicted head-3 view directions.
    theta and alpha are 0 by definition when their vectors degenerate."""
    P, Q, p, _, v = _stack(inputs)
    d = P[2] - p
    n = float(np.linalg.norm(d))
    if n < DEGENERATE_EPS:
        theta = 0.0
    else:
        theta = math.acos(max(-1.0, min(1.0, float(np.dot(v, d)) / n)))
    u, N = _pred_view(Q[2])
    cos_a = float(np.dot(v, u)) / N
    alpha = math.acos(max(-1.0, min(1.0, cos_a)))
    return GeometricTerms(d, theta, alpha)


def _loss_value(id: int, w: LossWeights, alpha_mode: str, P, Q, p, q, v) -> float:
    row = _ROWS[id]
    g1, g2 = w.geo_scales
    total = 0.0
    if row["pos"]:
        for i in range(3):
            total += w.omega[i] * float(np.linalg.norm(P[i] - p))
    if row["rot"] is not None:
        for i in range(3):
            total += w.rot_scale * w.beta[i] * float(np.linalg.norm(Q[i] - q))
    d = P[2] - p
    n = float(np.linalg.norm(d))
    if n < DEGENERATE_EPS:
        omct = 0.0
    else:
        omct = 1.0 - float(np.dot(v, d)) / n
    if row["geo1"]:
        total += g1 * n * n * omct
    if row["geo2"]:
        total += g2 * n
    if row["c512"]:
        total += 512.0 * omct
    if row["alpha"]:
        if alpha_mode == "view":
            u, N = _pred_view(Q[2])
            omca = 1.0 - float(np.dot(v, u)) / N
        else:
            a = float(np.linalg.norm(p))
            b = float(np.linalg.norm(P[2]))
            if a < DEGENERATE_EPS or b < DEGENERATE_EPS:
                omca = 0.0
            else:
                omca = 1.0 - float(np.dot(p, P[2])) / (a * b)
        total += n * n * omca
    return total


def evaluate(f: LossFormulation, inputs: LossInputs) -> float:
    """Scalar loss value for one formulation at one set of predictions."""
    P, Q, p, q, v = _stack(inputs)
    return _loss_value(f.id, f.weights, f.alpha_mode, P, Q, p, q, v)


def gradient(f: LossFormulation, inputs: LossInputs) -> LossGradient:
    """Analytic partials of the loss w.r.t. predicted positions/quaternions.

    At kinks (zero displacement or zero quaternion difference) the zero
    subgradient is returned for the affected term.
    """
    P, Q, p, q, v = _stack(inputs)
    row = _ROWS[f.id]
    w = f.weights
    g1, g2 = w.geo_scales
    dP = np.zeros((3, 3))
    dQ = np.zeros((3, 4))

    if row["pos"]:
        for i in range(3):
            diff = P[i] - p
            n = float(np.linalg.norm(diff))
            if n >= DEGENERATE_EPS:
                dP[i] += w.omega[i] * diff / n
    if row["rot"] is not None:
        for i in range(3):
            diff = Q[i] - q
            n = float(np.linalg.norm(diff))
            if n >= DEGENERATE_EPS:
                dQ[i] += w.rot_scale * w.beta[i] * diff / n

    d = P[2] - p
    n = float(np.linalg.norm(d))
    s = float(np.dot(v, d))
    if n >= DEGENERATE_EPS:
        if row["geo1"]:
            # g1 * (n^2 - n s):  d/dd = g1 * (2 d - s d / n - n v)
            dP[2] += g1 * (2.0 * d - s * d / n - n * v)
        if row["geo2"]:
            dP[2] += g2 * d / n
        if row["c512"]:
            # 512 * (1 - s / n):  d/dd = 512 * (s d / n^3 - v / n)
            dP[2] += 512.0 * (s * d / n**3 - v / n)

    if row["alpha"]:
        if f.alpha_mode == "view":
            u, N = _pred_view(Q[2])
            cos_a = float(np.dot(v, u)) / N
            dP[2] += 2.0 * d * (1.0 - cos_a)
            qw, qx, qy, qz = Q[2]
            du = np.array(
                [
                    [2 * qy, -2 * qx, -2 * qw],
                    [-2 * qz, -2 * qw, 2 * qx],
                    [2 * qw, -2 * qz, 2 * qy],
                    [-2 * qx, -2 * qy, -2 * qz],
                ]
            )  # du[k] = d u / d q_k
            dcos = (du @ v) / N - cos_a * 2.0 * Q[2] / N
            dQ[2] += -(n * n) * dcos
        else:
            a = float(np.linalg.norm(p))
            b = float(np.linalg.norm(P[2]))
            if a >= DEGENERATE_EPS and b >= DEGENERATE_EPS:
                sp = float(np.dot(p, P[2]))
                cos_a = sp / (a * b)
                dP[2] += 2.0 * d * (1.0 - cos_a)
                dP[2] += -(n * n) * (p / (a * b) - sp * P[2] / (a * b**3))

    return LossGradient(dP, dQ)
