"""Shared test helpers: random geometry and the finite-difference oracle."""

import numpy as np

from posenav import losses
from posenav.posecore import Pose, Position, Quaternion


def random_unit_quat(rng, min_w=0.0):
    """Random unit quaternion; resamples until |w| >= min_w (keeps the
    canonical-sign flip away from finite-difference perturbations)."""
    while True:
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        if abs(q[0]) >= min_w:
            if q[0] < 0:
                q = -q
            return Quaternion(*q)


def random_pose(rng, scale=1.0, min_w=0.0):
    p = Position(*(rng.normal(size=3) * scale))
    return Pose(p, random_unit_quat(rng, min_w=min_w))


def random_loss_inputs(rng, nondegenerate=True):
    """Random LossInputs; with nondegenerate=True all position and quaternion
    differences are bounded away from the loss kinks."""
    while True:
        truth = random_pose(rng, min_w=0.1 if nondegenerate else 0.0)
        preds = []
        for _ in range(3):
            preds.append(random_pose(rng, min_w=0.1 if nondegenerate else 0.0))
        inputs = losses.LossInputs.from_poses(preds, truth)
        if not nondegenerate:
            return inputs
        P, Q, p, q, _ = losses._stack(inputs)
        ok = all(np.linalg.norm(P[i] - p) > 0.1 for i in range(3))
        ok = ok and all(np.linalg.norm(Q[i] - q) > 0.05 for i in range(3))
        # keep truth position away from the origin for the position-alpha mode
        ok = ok and np.linalg.norm(p) > 0.1 and np.linalg.norm(P[2]) > 0.1
        if ok:
            return inputs


def fd_gradient(f, inputs, step=1e-6):
    """Central finite differences of the loss over all 21 prediction
    components, computed directly on the stacked arrays (the independent
    oracle for the analytic gradient)."""
    P, Q, p, q, v = losses._stack(inputs)

    def value(P, Q):
        return losses._loss_value(f.id, f.weights, f.alpha_mode, P, Q, p, q, v)

    dP = np.zeros((3, 3))
    dQ = np.zeros((3, 4))
    for i in range(3):
        for j in range(3):
            Pp, Pm = P.copy(), P.copy()
            Pp[i, j] += step
            Pm[i, j] -= step
            dP[i, j] = (value(Pp, Q) - value(Pm, Q)) / (2 * step)
        for j in range(4):
            Qp, Qm = Q.copy(), Q.copy()
            Qp[i, j] += step
            Qm[i, j] -= step
            dQ[i, j] = (value(P, Qp) - value(P, Qm)) / (2 * step)
    return dP, dQ


def gradient_relative_error(f, inputs, step=1e-6):
    """Relative error between stacked analytic and finite-difference gradients."""
    g = losses.gradient(f, inputs)
    fdP, fdQ = fd_gradient(f, inputs, step=step)
    a = np.concatenate([g.position.ravel(), g.quaternion.ravel()])
    b = np.concatenate([fdP.ravel(), fdQ.ravel()])
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12)
