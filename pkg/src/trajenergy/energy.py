"""Energy cost of a trajectory: the time integral of sum_i(tau_i^2 + lambda * qd_i^2).

Torques come from inverse dynamics under a perfect-tracking assumption. The
cost mixes squared torque and squared velocity, so it is reported in "cost
units" rather than joules.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, TooFewSamples, TooFewTrajectories, ValidationError
from .kinodynamics import inverse_dynamics_batch
from .model import RobotModel
from .trajgen import DEFAULT_DT, Trajectory

DEFAULT_LAMBDA = 0.1

# (times, q, qd, qdd) -> tau, all joint arrays shaped (N, n)
TorqueProvider = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EnergyParams:
    lam: float = DEFAULT_LAMBDA
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if not self.lam >= 0:
            raise ValidationError("lambda", f"must be >= 0, got {self.lam}")
        if not self.dt > 0:
            raise ValidationError("dt", f"must be > 0, got {self.dt}")


@dataclass(frozen=True, eq=False)
class EnergyBreakdown:
    total: float
    torque_term: float
    velocity_term: float
    per_joint: np.ndarray
    time: np.ndarray = field(repr=False)
    series: np.ndarray = field(repr=False)


def cumulative_trapezoid(values, dt: float) -> np.ndarray:
    """Running composite-trapezoid integral, starting at 0."""
    values = np.asarray(values, dtype=float)
    if values.shape[0] < 2:
        raise TooFewSamples(f"need at least 2 samples, got {values.shape[0]}")
    if not dt > 0:
        raise ValidationError("dt", f"must be > 0, got {dt}")
    steps = 0.5 * dt * (values[1:] + values[:-1])
    out = np.zeros_like(values)
    np.cumsum(steps, axis=0, out=out[1:])
    return out


def integrate_series(values, dt: float) -> float:
    """Composite trapezoid rule over uniformly spaced samples."""
    return float(cumulative_trapezoid(values, dt)[-1])


def zero_torque(times, q, qd, qdd) -> np.ndarray:
    """Torque provider that drops the torque term (velocity-only cost)."""
    return np.zeros_like(q)


def model_torque(model: RobotModel) -> TorqueProvider:
    def provider(times, q, qd, qdd):
        return inverse_dynamics_batch(model, q, qd, qdd)

    return provider


def sampled_terms(
    model: RobotModel | None,
    traj: Trajectory,
    params: EnergyParams,
    torque: TorqueProvider | None = None,
):
    """Sample ``traj`` at ``params.dt`` and return (t, q, qd, qdd, tau, step)."""
    if torque is None:
        if model is None:
            raise ValueError("either a model or a torque provider is required")
        if model.n_joints != traj.n_joints:
            raise DimensionError(
                f"trajectory has {traj.n_joints} joints, model has {model.n_joints}"
            )
        torque = model_torque(model)
    t, q, qd, qdd = traj.sample(params.dt)
    tau = np.asarray(torque(t, q, qd, qdd), dtype=float)
    if tau.shape != q.shape:
        raise DimensionError(f"torque provider returned shape {tau.shape}, expected {q.shape}")
    step = traj.duration / (len(t) - 1)
    return t, q, qd, qdd, tau, step


def energy_cost(
    model: RobotModel | None,
    traj: Trajectory,
    params: EnergyParams = EnergyParams(),
    torque: TorqueProvider | None = None,
) -> EnergyBreakdown:
    """Integrate the energy functional over the whole trajectory.

    ``torque`` overrides inverse dynamics; with an override ``model`` may be None.
    """
    t, _, qd, _, tau, step = sampled_terms(model, traj, params, torque)
    tau_sq = tau**2
    vel_sq = params.lam * qd**2
    tau_joint = cumulative_trapezoid(tau_sq, step)[-1]
    vel_joint = cumulative_trapezoid(vel_sq, step)[-1]
    torque_term = float(np.sum(tau_joint))
    velocity_term = float(np.sum(vel_joint))
    return EnergyBreakdown(
        total=torque_term + velocity_term,
        torque_term=torque_term,
        velocity_term=velocity_term,
        per_joint=tau_joint + vel_joint,
        time=t,
        series=np.sum(tau_sq + vel_sq, axis=1),
    )


@dataclass(frozen=True)
class EnergyRank:
    name: str
    breakdown: EnergyBreakdown
    delta_total: float
    delta_torque: float
    delta_velocity: float


def compare_energy(
    model: RobotModel | None,
    trajectories: Sequence[tuple[str, Trajectory]],
    params: EnergyParams = EnergyParams(),
    torque: TorqueProvider | None = None,
) -> list[EnergyRank]:
    """Rank named trajectories by total cost, cheapest first.

    Deltas are measured against the cheapest entry; ties keep input order.
    """
    if len(trajectories) < 2:
        raise TooFewTrajectories(f"need at least 2 trajectories, got {len(trajectories)}")
    dims = {traj.n_joints for _, traj in trajectories}
    if len(dims) != 1 or (model is not None and dims != {model.n_joints}):
        raise DimensionError("trajectories do not share the model's joint count")
    results = [(name, energy_cost(model, traj, params, torque)) for name, traj in trajectories]
    results.sort(key=lambda item: item[1].total)
    best = results[0][1]
    return [
        EnergyRank(
            name,
            b,
            b.total - best.total,
            b.torque_term - best.torque_term,
            b.velocity_term - best.velocity_term,
        )
        for name, b in results
    ]
