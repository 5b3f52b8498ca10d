"""Repulsive potential fields around spherical obstacles and trajectory deformation.

Each obstacle pushes a robot point at surface distance ``d`` with magnitude
``k (1/d - 1/d_safe) / d^2`` while ``d <= d_safe`` and not at all beyond.
The push direction is the unit vector from the sphere centre through the
point. Distances are measured to the sphere surface, so ``d_safe`` is a
clearance.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EndpointBlocked, ParseError, PenetrationError, ValidationError
from .kinodynamics import (
    _as_joint_vector,
    batch_frame_positions,
    batch_point_jacobians,
)
from .model import RobotModel
from .trajgen import Trajectory, scale_velocity, spline_through_waypoints

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Obstacle:
    center: tuple[float, float, float]
    radius: float
    k: float
    d_safe: float

    def __post_init__(self):
        center = tuple(float(c) for c in self.center)
        if len(center) != 3 or not all(math.isfinite(c) for c in center):
            raise ValidationError("center", "must be 3 finite numbers")
        object.__setattr__(self, "center", center)
        if not self.radius >= 0:
            raise ValidationError("radius", f"must be >= 0, got {self.radius}")
        if not self.k > 0:
            raise ValidationError("k", f"must be > 0, got {self.k}")
        if not self.d_safe > 0:
            raise ValidationError("d_safe", f"must be > 0, got {self.d_safe}")


@dataclass(frozen=True)
class Scene:
    """Static obstacle set. ``check_points`` lists frame indices; None means every frame."""

    obstacles: tuple[Obstacle, ...] = ()
    check_points: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        if self.check_points is not None:
            object.__setattr__(self, "check_points", tuple(int(c) for c in self.check_points))

    def frames(self, model: RobotModel) -> np.ndarray:
        if self.check_points is None:
            return np.arange(model.n_joints + 1)
        frames = np.asarray(self.check_points, dtype=int)
        if np.any(frames < 0) or np.any(frames > model.n_joints):
            raise ValidationError("check_points", f"frame index outside 0..{model.n_joints}")
        return frames


@dataclass(frozen=True, eq=False)
class RepulsiveForce:
    vector: np.ndarray
    distance: float


@dataclass(frozen=True, eq=False)
class SceneForce:
    frames: np.ndarray
    positions: np.ndarray
    forces: np.ndarray  # (len(frames), 3), summed over obstacles
    min_distance: float


def field_magnitude(k: float, d, d_safe: float):
    """Repulsive magnitude at surface distance ``d`` (scalar or array, d > 0)."""
    d = np.asarray(d, dtype=float)
    mag = k * (1.0 / d - 1.0 / d_safe) / d**2
    return np.where(d <= d_safe, mag, 0.0)


def repulsive_force(obstacle: Obstacle, point) -> RepulsiveForce:
    point = np.asarray(point, dtype=float)
    offset = point - np.asarray(obstacle.center)
    dist = float(np.linalg.norm(offset))
    d = dist - obstacle.radius
    if d <= 0:
        raise PenetrationError(f"point {point.tolist()} is {-d:.6g} m inside the obstacle surface")
    if d > obstacle.d_safe:
        return RepulsiveForce(np.zeros(3), d)
    return RepulsiveForce(float(field_magnitude(obstacle.k, d, obstacle.d_safe)) * offset / dist, d)


def _obstacle_arrays(scene: Scene):
    centers = np.array([o.center for o in scene.obstacles]).reshape(-1, 3)
    radii = np.array([o.radius for o in scene.obstacles])
    gains = np.array([o.k for o in scene.obstacles])
    d_safe = np.array([o.d_safe for o in scene.obstacles])
    return centers, radii, gains, d_safe


def _surface_distance(scene: Scene, points: np.ndarray) -> np.ndarray:
    """Signed surface distances, shape points.shape[:-1] + (n_obstacles,)."""
    centers, radii, _, _ = _obstacle_arrays(scene)
    offsets = points[..., None, :] - centers
    return np.linalg.norm(offsets, axis=-1) - radii


def scene_force(scene: Scene, model: RobotModel, q) -> SceneForce:
    """Summed obstacle forces at every check point for configuration ``q``."""
    q = _as_joint_vector(model, q)
    frames = scene.frames(model)
    positions = batch_frame_positions(model, q)[0][frames]
    forces = np.zeros((len(frames), 3))
    min_distance = math.inf
    for j, obstacle in enumerate(scene.obstacles):
        for row, frame in enumerate(frames):
            try:
                push = repulsive_force(obstacle, positions[row])
            except PenetrationError as exc:
                raise PenetrationError(
                    f"frame {frame} penetrates obstacle {j}: {exc}", obstacle=j, frame=int(frame)
                ) from exc
            forces[row] += push.vector
            min_distance = min(min_distance, push.distance)
    return SceneForce(frames, positions, forces, min_distance)


def min_clearance(scene: Scene, model: RobotModel, qs) -> float:
    """Smallest signed surface distance over configurations, frames and obstacles."""
    if not scene.obstacles:
        return math.inf
    positions = batch_frame_positions(model, qs)[:, scene.frames(model)]
    return float(np.min(_surface_distance(scene, positions)))


@dataclass(frozen=True)
class DeformOptions:
    """Tuning for :func:`deform_trajectory`.

    ``clearance_target`` defaults to the smallest ``d_safe`` in the scene.
    ``max_joint_step`` caps the per-iteration displacement of any sample (rad),
    since the field grows without bound near a surface. ``smoothing`` is the
    width, as a fraction of the sample count, over which one sample's push is
    spread to its neighbours; 0 moves every sample independently. ``tolerance`` is the
    relative shortfall from the target accepted as converged: the field fades
    to zero at ``d_safe``, so the target is only approached asymptotically.
    """

    step_size: float = 0.01
    max_iters: int = 500
    clearance_target: float | None = None
    max_joint_step: float = 0.05
    smoothing: float = 0.05
    tolerance: float = 0.02
    max_halvings: int = 8
    rescale: bool = True


@dataclass
class DeformationReport:
    iterations: int
    initial_clearance: float
    final_clearance: float
    converged: bool
    clearance_history: list[float] = field(default_factory=list)
    iteration_seconds: list[float] = field(default_factory=list)


def _displacement(scene: Scene, model: RobotModel, qs: np.ndarray, floor: float) -> np.ndarray:
    """Jacobian-transpose mapped field forces for every sample, shape (N, n).

    Points on or inside a surface are pushed as if they sat at distance
    ``floor``; a point exactly at a centre is pushed radially away from the base.
    """
    frames = scene.frames(model)
    origins, jac = batch_point_jacobians(model, qs)
    origins, jac = origins[:, frames], jac[:, frames]
    centers, radii, gains, d_safe = _obstacle_arrays(scene)
    offsets = origins[:, :, None, :] - centers  # (N, F, M, 3)
    dist = np.linalg.norm(offsets, axis=-1)
    d = np.maximum(dist - radii, floor)
    mag = np.where(d <= d_safe, gains * (1.0 / d - 1.0 / d_safe) / d**2, 0.0)
    at_center = dist < 1e-12
    if np.any(at_center):
        radial = np.broadcast_to(origins[:, :, None, :], offsets.shape)
        radial_norm = np.linalg.norm(radial, axis=-1, keepdims=True)
        fallback = np.where(radial_norm > 0, radial / np.maximum(radial_norm, 1e-300), [0, 0, 1])
        offsets = np.where(at_center[..., None], fallback, offsets)
        dist = np.where(at_center, 1.0, dist)
    forces = np.sum(mag[..., None] * offsets / dist[..., None], axis=2)  # (N, F, 3)
    return np.einsum("nfcj,nfc->nj", jac, forces)


def _smoother(n_samples: int, width: float) -> np.ndarray | None:
    """Squared inverse of I + s L on the interior samples, L the Dirichlet Laplacian.

    One inverse alone has a cusp at every pushed sample; applying it twice gives
    a kernel with a continuous slope. Rows are positive and sum to at most 1,
    so smoothing never amplifies a push.
    """
    m = n_samples - 2
    s = (width * n_samples) ** 2
    if m < 1 or s == 0:
        return None
    A = np.eye(m) * (1 + 2 * s) - s * (np.eye(m, k=1) + np.eye(m, k=-1))
    inv = np.linalg.inv(A)
    return inv @ inv


def deform_trajectory(
    traj: Trajectory,
    scene: Scene,
    model: RobotModel,
    opts: DeformOptions = DeformOptions(),
) -> tuple[Trajectory, DeformationReport]:
    """Push a trajectory's interior samples out of the obstacle fields.

    Samples on the trajectory's own time grid are displaced by
    ``step_size * J^T F`` per iteration, spread along the trajectory by a
    smoothing operator, with a line search that halves the
    step whenever the scene-wide minimum clearance would shrink. The endpoints
    never move. The displaced samples are re-splined and, unless disabled,
    re-scaled to the model's velocity and acceleration limits.

    Raises:
        EndpointBlocked: an endpoint is not clear of ``clearance_target``.
    """
    if not scene.obstacles:
        return traj, DeformationReport(0, math.inf, math.inf, True)
    target = opts.clearance_target
    if target is None:
        target = min(o.d_safe for o in scene.obstacles)
    times, qs, _, _ = traj.sample()
    qs = qs.copy()
    for label, q in (("start", qs[0]), ("end", qs[-1])):
        clear = min_clearance(scene, model, q[None, :])
        if not clear > target:
            raise EndpointBlocked(f"trajectory {label} has clearance {clear:.6g} <= {target:.6g}")

    clearance = min_clearance(scene, model, qs)
    report = DeformationReport(0, clearance, clearance, False, [clearance])
    goal = target * (1.0 - opts.tolerance)
    if clearance >= goal:
        report.converged = True
        return traj, report

    floor = 1e-3 * target
    smoother = _smoother(len(qs), opts.smoothing)
    for _ in range(opts.max_iters):
        started = time.perf_counter()
        step = opts.step_size * _displacement(scene, model, qs, floor)
        step[[0, -1]] = 0.0
        if smoother is not None:
            step[1:-1] = smoother @ step[1:-1]
        largest = float(np.max(np.linalg.norm(step, axis=1)))
        if largest > opts.max_joint_step:
            step *= opts.max_joint_step / largest
        accepted = None
        for _ in range(opts.max_halvings + 1):
            trial = qs + step
            trial_clear = min_clearance(scene, model, trial)
            if trial_clear >= clearance:
                accepted = trial
                break
            step *= 0.5
        report.iterations += 1
        report.iteration_seconds.append(time.perf_counter() - started)
        if accepted is None:
            log.debug("deformation stalled at clearance %.6g", clearance)
            break
        qs, clearance = accepted, trial_clear
        report.clearance_history.append(clearance)
        if clearance >= goal:
            report.converged = True
            break

    deformed = spline_through_waypoints(list(zip(times, qs)), traj.dt)
    if opts.rescale:
        deformed = scale_velocity(deformed, model.v_max, model.a_max)
    _, final_qs, _, _ = deformed.sample()
    report.final_clearance = min_clearance(scene, model, final_qs)
    log.info(
        "deformation: %d iterations, clearance %.4g -> %.4g, converged=%s",
        report.iterations,
        report.initial_clearance,
        report.final_clearance,
        report.converged,
    )
    return deformed, report


def load_scene(path) -> Scene:
    """Read a JSON array of ``{center, radius, k, d_safe}`` obstacles."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read scene file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed scene file {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ValidationError("scene", "top level must be an array")
    obstacles = []
    keys = {"center", "radius", "k", "d_safe"}
    for i, entry in enumerate(data):
        if not isinstance(entry, dict) or set(entry) != keys:
            raise ValidationError(f"scene[{i}]", f"expected keys {sorted(keys)}")
        try:
            obstacles.append(
                Obstacle(
                    tuple(float(c) for c in entry["center"]),
                    float(entry["radius"]),
                    float(entry["k"]),
                    float(entry["d_safe"]),
                )
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ValidationError):
                raise ValidationError(f"scene[{i}].{exc.field}", str(exc)) from exc
            raise ValidationError(f"scene[{i}]", "numeric fields expected") from exc
    return Scene(tuple(obstacles))


def save_scene(scene: Scene, path) -> None:
    data = [
        {"center": list(o.center), "radius": o.radius, "k": o.k, "d_safe": o.d_safe}
        for o in scene.obstacles
    ]
    Path(path).write_text(json.dumps(data, indent=2) + "\n")
