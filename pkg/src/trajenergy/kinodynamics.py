"""Forward kinematics, Jacobians and recursive Newton-Euler inverse dynamics.

Kinematic convention
--------------------
Frame k (k = 0 .. n-1) sits at the origin of joint k+1. Its orientation is
``R_k = R_{k-1} @ rot(axis_k, q_k)`` with ``R_{-1} = I``, so each joint
rotates about its own axis expressed in the parent frame. The next origin is
reached by translating ``length_k`` along the local x axis of ``R_k``.
Frame n is the end-effector, with the orientation of the last link.

Mass model: a point mass at ``com_offset`` along the link x axis plus an
inertia tensor ``inertia_zz * a a^T`` about the centre of mass, where ``a`` is
the joint axis. For planar chains this reduces to the textbook scalar
inertia about the centre of mass.

Torques include gravity: holding a pose against gravity needs nonzero torque.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .model import RobotModel


@dataclass(frozen=True)
class FramePose:
    position: np.ndarray
    orientation: np.ndarray


@dataclass(frozen=True)
class JointState:
    q: np.ndarray
    qd: np.ndarray
    qdd: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        n = len(self.q)
        for name in ("q", "qd", "qdd", "tau"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (n,):
                raise DimensionError(f"{name} has shape {v.shape}, expected ({n},)")
            if not np.all(np.isfinite(v)):
                raise DimensionError(f"{name} has non-finite entries")
            object.__setattr__(self, name, v)


def _as_joint_vector(model: RobotModel, v, name: str = "q") -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape != (model.n_joints,):
        raise DimensionError(f"{name} has shape {v.shape}, expected ({model.n_joints},)")
    return v


def _as_joint_batch(model: RobotModel, v, name: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.ndim == 1:
        v = v[None, :]
    if v.ndim != 2 or v.shape[1] != model.n_joints:
        raise DimensionError(f"{name} has shape {v.shape}, expected (N, {model.n_joints})")
    return v


def _rotation(axis: np.ndarray, angle: np.ndarray) -> np.ndarray:
    """Rodrigues rotations about a fixed unit axis, batched over ``angle``."""
    x, y, z = axis
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    s = np.sin(angle)[:, None, None]
    c = np.cos(angle)[:, None, None]
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def _chain(model: RobotModel, q: np.ndarray):
    """Batched frame data for ``q`` of shape (N, n).

    Returns (rotations, origins, axes): rotations (N, n, 3, 3), origins
    (N, n+1, 3) with the end-effector last, world joint axes (N, n, 3).
    """
    N, n = q.shape
    R = np.broadcast_to(np.eye(3), (N, 3, 3)).copy()
    p = np.zeros((N, 3))
    rots = np.empty((N, n, 3, 3))
    origins = np.empty((N, n + 1, 3))
    axes = np.empty((N, n, 3))
    for i, link in enumerate(model.links):
        axis = np.asarray(link.joint_axis)
        axes[:, i] = R @ axis
        R = R @ _rotation(axis, q[:, i])
        rots[:, i] = R
        origins[:, i] = p
        p = p + link.length * R[:, :, 0]
    origins[:, n] = p
    return rots, origins, axes


def _warn_limits(model: RobotModel, q: np.ndarray) -> None:
    if np.any(q < model.q_min) or np.any(q > model.q_max):
        warnings.warn("joint configuration outside joint limits", RuntimeWarning, stacklevel=3)


def forward_kinematics(model: RobotModel, q) -> list[FramePose]:
    """Poses of the n link frames followed by the end-effector."""
    q = _as_joint_vector(model, q)
    _warn_limits(model, q)
    rots, origins, _ = _chain(model, q[None, :])
    poses = [FramePose(origins[0, i].copy(), rots[0, i].copy()) for i in range(model.n_joints)]
    poses.append(FramePose(origins[0, -1].copy(), rots[0, -1].copy()))
    return poses


def frame_positions(model: RobotModel, q) -> np.ndarray:
    """Positions of all n + 1 frames as an (n+1, 3) array."""
    q = _as_joint_vector(model, q)
    return _chain(model, q[None, :])[1][0]


def point_jacobians(model: RobotModel, q) -> tuple[np.ndarray, np.ndarray]:
    """Frame positions (n+1, 3) and their linear Jacobians (n+1, 3, n).

    Joint j moves frame f only when j < f, with column ``z_j x (p_f - p_j)``.
    """
    q = _as_joint_vector(model, q)
    origins, jac = batch_point_jacobians(model, q[None, :])
    return origins[0], jac[0]


def batch_frame_positions(model: RobotModel, q) -> np.ndarray:
    """Frame positions for N configurations, shape (N, n+1, 3)."""
    return _chain(model, _as_joint_batch(model, q, "q"))[1]


def batch_point_jacobians(model: RobotModel, q) -> tuple[np.ndarray, np.ndarray]:
    """Batched :func:`point_jacobians`: shapes (N, n+1, 3) and (N, n+1, 3, n)."""
    q = _as_joint_batch(model, q, "q")
    _, origins, axes = _chain(model, q)
    N, n = q.shape
    jac = np.zeros((N, n + 1, 3, n))
    for f in range(1, n + 1):
        lever = origins[:, f, None, :] - origins[:, :f, :]
        jac[:, f, :, :f] = np.cross(axes[:, :f], lever).transpose(0, 2, 1)
    return origins, jac


def jacobian(model: RobotModel, q, frame: int | None = None) -> np.ndarray:
    """3 x n linear-velocity Jacobian of ``frame`` (default: end-effector)."""
    _, jac = point_jacobians(model, q)
    return jac[model.n_joints if frame is None else frame]


def inverse_dynamics_batch(model: RobotModel, q, qd, qdd) -> np.ndarray:
    """Recursive Newton-Euler torques for N states at once; arrays are (N, n)."""
    q = _as_joint_batch(model, q, "q")
    qd = _as_joint_batch(model, qd, "qd")
    qdd = _as_joint_batch(model, qdd, "qdd")
    if not (q.shape == qd.shape == qdd.shape):
        raise DimensionError("q, qd and qdd must share a shape")
    N, n = q.shape
    R = np.broadcast_to(np.eye(3), (N, 3, 3)).copy()
    w = np.zeros((N, 3))
    dw = np.zeros((N, 3))
    acc = np.broadcast_to(-np.asarray(model.gravity), (N, 3)).copy()

    fwd = []
    for i, link in enumerate(model.links):
        axis = np.asarray(link.joint_axis)
        z = R @ axis
        R = R @ _rotation(axis, q[:, i])
        spin = z * qd[:, i, None]
        dw = dw + z * qdd[:, i, None] + np.cross(w, spin)
        w = w + spin
        x = R[:, :, 0]
        r_c = link.com_offset * x
        span = link.length * x
        acc_c = acc + np.cross(dw, r_c) + np.cross(w, np.cross(w, r_c))
        acc = acc + np.cross(dw, span) + np.cross(w, np.cross(w, span))
        fwd.append((z, w, dw, r_c, span, acc_c))

    tau = np.empty((N, n))
    f_next = np.zeros((N, 3))
    n_next = np.zeros((N, 3))
    for i in range(n - 1, -1, -1):
        link = model.links[i]
        z, w_i, dw_i, r_c, span, acc_c = fwd[i]
        force = link.mass * acc_c
        # rank-1 inertia about the joint axis: I w = I_zz z (z . w)
        iw = link.inertia_zz * z * np.einsum("ij,ij->i", z, w_i)[:, None]
        idw = link.inertia_zz * z * np.einsum("ij,ij->i", z, dw_i)[:, None]
        moment = idw + np.cross(w_i, iw) + np.cross(r_c, force) + n_next + np.cross(span, f_next)
        f_next = force + f_next
        n_next = moment
        tau[:, i] = np.einsum("ij,ij->i", moment, z)
    return tau


def inverse_dynamics(model: RobotModel, q, qd, qdd) -> np.ndarray:
    """Joint torques realising (q, qd, qdd) under the model's gravity."""
    q = _as_joint_vector(model, q, "q")
    qd = _as_joint_vector(model, qd, "qd")
    qdd = _as_joint_vector(model, qdd, "qdd")
    return inverse_dynamics_batch(model, q, qd, qdd)[0]


def gravity_torque(model: RobotModel, q) -> np.ndarray:
    q = _as_joint_vector(model, q)
    zero = np.zeros_like(q)
    return inverse_dynamics(model, q, zero, zero)
