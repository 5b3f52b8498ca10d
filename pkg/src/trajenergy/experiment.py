"""Experiment configuration and the plan -> avoid -> scale -> replay pipeline."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .avoidance import DeformationReport, DeformOptions, Scene, deform_trajectory, load_scene
from .energy import EnergyParams
from .errors import DimensionError, ParseError, TrajEnergyError, ValidationError
from .model import RobotModel, default_seven_dof, load_robot
from .simeval import MetricsReport, replay
from .trajgen import (
    Trajectory,
    dilate,
    load_waypoints,
    scale_velocity,
    sinusoidal_through_waypoints,
    spline_through_waypoints,
)

GENERATORS = ("cubic", "sinusoidal")

# JSON key -> dataclass field, where they differ
_KEY_ALIASES = {"lambda": "lam"}


class PlanningFailure(TrajEnergyError):
    """The pipeline ran but could not produce an acceptable trajectory."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One planning run.

    ``robot`` None selects the bundled 7-joint arm. Without a waypoint file
    the run moves from ``start`` (default all zeros) to ``goal`` (default
    0.5 rad on every joint) in ``duration`` seconds. ``time_scale`` applies
    an extra explicit slow-down after limit-driven scaling.
    """

    name: str = "run"
    robot: str | None = None
    scene: str | None = None
    waypoints: str | None = None
    start: tuple[float, ...] | None = None
    goal: tuple[float, ...] | None = None
    duration: float = 2.0
    generator: str = "cubic"
    lam: float = 0.1
    dt: float = 0.01
    scaling: bool = True
    avoidance: bool = False
    time_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValidationError("generator", f"must be one of {GENERATORS}")
        for key in ("duration", "dt", "lam", "time_scale"):
            value = getattr(self, key)
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(_json_key(key), f"expected a number, got {value!r}")
            if not math.isfinite(value):
                raise ValidationError(_json_key(key), "must be finite")
        if not self.dt > 0:
            raise ValidationError("dt", "must be > 0")
        if not self.lam >= 0:
            raise ValidationError("lambda", "must be >= 0")
        if not self.duration > 0:
            raise ValidationError("duration", "must be > 0")
        if not self.time_scale >= 1:
            raise ValidationError("time_scale", "must be >= 1")
        for key in ("start", "goal"):
            value = getattr(self, key)
            if value is not None:
                object.__setattr__(self, key, tuple(float(v) for v in value))


def _json_key(attr: str) -> str:
    return {v: k for k, v in _KEY_ALIASES.items()}.get(attr, attr)


def config_from_dict(data: dict, base_dir: Path | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ValidationError("config", "top level must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    kwargs = {}
    for key, value in data.items():
        attr = _KEY_ALIASES.get(key, key)
        if attr not in known or key in _KEY_ALIASES.values():
            raise ValidationError(key, "unknown config key")
        if attr in ("robot", "scene", "waypoints") and value is not None and base_dir is not None:
            value = str((base_dir / value) if not Path(value).is_absolute() else Path(value))
        kwargs[attr] = value
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read config file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed config file {path}: {exc}") from exc
    cfg = config_from_dict(data, path.parent)
    if "name" not in data:
        cfg = replace(cfg, name=path.stem)
    return cfg


@dataclass
class PlanResult:
    config: ExperimentConfig
    model: RobotModel
    trajectory: Trajectory
    deformation: DeformationReport | None = None
    metrics: MetricsReport | None = field(default=None, repr=False)


def _waypoints(cfg: ExperimentConfig, n: int):
    if cfg.waypoints is not None:
        wps = load_waypoints(cfg.waypoints)
    else:
        start = cfg.start if cfg.start is not None else (0.0,) * n
        goal = cfg.goal if cfg.goal is not None else (0.5,) * n
        wps = [(0.0, list(start)), (cfg.duration, list(goal))]
    for i, (_, q) in enumerate(wps):
        if len(q) != n:
            raise DimensionError(f"waypoint {i} has {len(q)} joints, robot has {n}")
    return wps


def plan(cfg: ExperimentConfig) -> PlanResult:
    """Generate, optionally deform and scale the configured trajectory.

    Raises:
        ParseError, ValidationError, DimensionError: bad configuration.
        PlanningFailure: avoidance was requested and did not converge.
    """
    model = load_robot(cfg.robot) if cfg.robot is not None else default_seven_dof()
    wps = _waypoints(cfg, model.n_joints)
    build = spline_through_waypoints if cfg.generator == "cubic" else sinusoidal_through_waypoints
    traj = build(wps, cfg.dt)

    report = None
    if cfg.avoidance:
        scene = load_scene(cfg.scene) if cfg.scene is not None else Scene()
        try:
            traj, report = deform_trajectory(
                traj, scene, model, DeformOptions(rescale=cfg.scaling)
            )
        except TrajEnergyError as exc:
            raise PlanningFailure(str(exc)) from exc
        if not report.converged:
            raise PlanningFailure(
                f"avoidance did not converge after {report.iterations} iterations "
                f"(clearance {report.final_clearance:.4g})"
            )
    if cfg.scaling:
        traj = scale_velocity(traj, model.v_max, model.a_max)
    if cfg.time_scale != 1.0:
        traj = dilate(traj, cfg.time_scale)
    return PlanResult(cfg, model, traj, report)


def evaluate(cfg: ExperimentConfig) -> PlanResult:
    result = plan(cfg)
    result.metrics = replay(result.model, result.trajectory, EnergyParams(cfg.lam, cfg.dt))
    return result


def summarize(result: PlanResult) -> dict:
    m = result.metrics
    summary = {
        "name": result.config.name,
        "n_joints": result.model.n_joints,
        "duration": result.trajectory.duration,
        "total": m.total_energy,
        "lambda_term": m.velocity_term,
        "torque_term": m.torque_term,
        "smoothness_msj": m.smoothness_msj,
        "tracking_rms": m.tracking_rms,
        "peak_speed": float(np.max(m.velocity_magnitude)),
        "seed": result.config.seed,
    }
    if result.deformation is not None:
        d = result.deformation
        summary["avoidance"] = {
            "iterations": d.iterations,
            "initial_clearance": d.initial_clearance,
            "final_clearance": d.final_clearance,
            "converged": d.converged,
        }
    return summary
