"""Deterministic replay of a planned trajectory and the evaluation metrics.

Execution is perfect tracking: the executed motion is the planned one and
torques come from inverse dynamics, so every series is reproducible bit for
bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyParams, TorqueProvider, cumulative_trapezoid, sampled_terms
from .errors import FlatSeries, LengthMismatch, SeriesTooShort, TooFewSamples
from .model import RobotModel
from .trajgen import Trajectory


@dataclass(frozen=True, eq=False)
class MetricsReport:
    time: np.ndarray
    power_series: np.ndarray
    accel_norm: np.ndarray
    cumulative_energy: np.ndarray
    velocity_magnitude: np.ndarray
    tracking_rms: float
    smoothness_msj: float
    torque_term: float = 0.0
    velocity_term: float = 0.0
    q: np.ndarray = field(default=None, repr=False)

    @property
    def total_energy(self) -> float:
        return float(self.cumulative_energy[-1])

    def columns(self) -> dict[str, np.ndarray]:
        """Per-sample series keyed by their CSV column names."""
        return {
            "t": self.time,
            "power": self.power_series,
            "accel_norm": self.accel_norm,
            "cum_energy": self.cumulative_energy,
            "vel_mag": self.velocity_magnitude,
        }


def replay(
    model: RobotModel | None,
    traj: Trajectory,
    params: EnergyParams = EnergyParams(),
    torque: TorqueProvider | None = None,
) -> MetricsReport:
    t, q, qd, qdd, tau, step = sampled_terms(model, traj, params, torque)
    tau_sq = tau**2
    vel_sq = params.lam * qd**2
    power = np.sum(tau_sq + vel_sq, axis=1)
    return MetricsReport(
        time=t,
        power_series=power,
        accel_norm=np.linalg.norm(qdd, axis=1),
        cumulative_energy=cumulative_trapezoid(power, step),
        velocity_magnitude=np.linalg.norm(qd, axis=1),
        tracking_rms=tracking_error(traj, q, params.dt),
        smoothness_msj=smoothness(traj, params.dt),
        torque_term=float(np.sum(cumulative_trapezoid(tau_sq, step)[-1])),
        velocity_term=float(np.sum(cumulative_trapezoid(vel_sq, step)[-1])),
        q=q,
    )


def tracking_error(planned: Trajectory, executed, dt: float | None = None) -> float:
    """RMS over all joints and samples of executed minus planned positions."""
    _, q_plan, _, _ = planned.sample(dt)
    executed = np.asarray(executed, dtype=float)
    if executed.ndim == 1 and q_plan.shape[1] == 1:
        executed = executed[:, None]
    if executed.shape != q_plan.shape:
        raise LengthMismatch(f"executed shape {executed.shape} != planned {q_plan.shape}")
    return float(np.sqrt(np.mean((executed - q_plan) ** 2)))


def smoothness(traj: Trajectory, dt: float | None = None) -> float:
    """Mean squared jerk, jerk taken as the central difference of sampled acceleration."""
    t, _, _, qdd = traj.sample(dt)
    if len(t) < 4:
        raise TooFewSamples(f"need at least 4 samples, got {len(t)}")
    step = traj.duration / (len(t) - 1)
    jerk = (qdd[2:] - qdd[:-2]) / (2 * step)
    return float(np.mean(jerk**2))


def _lagged_correlation(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Pearson correlation of x[:n-L] with x[L:] for L = 0 .. max_lag."""
    n = len(x)
    lags = np.arange(max_lag + 1)
    m = n - lags
    spectrum = np.fft.rfft(x, 2 * n)
    cross = np.fft.irfft(spectrum * np.conj(spectrum))[: max_lag + 1]
    cs = np.concatenate(([0.0], np.cumsum(x)))
    cs2 = np.concatenate(([0.0], np.cumsum(x * x)))
    mean_a = cs[n - lags] / m
    mean_b = (cs[n] - cs[lags]) / m
    var_a = cs2[n - lags] / m - mean_a**2
    var_b = (cs2[n] - cs2[lags]) / m - mean_b**2
    cov = cross / m - mean_a * mean_b
    with np.errstate(invalid="ignore", divide="ignore"):
        r = cov / np.sqrt(np.maximum(var_a * var_b, 0.0))
    return np.nan_to_num(r)


def periodicity_check(series, expected_period: float, dt: float) -> float:
    """Dominant period of ``series`` in seconds, from its autocorrelation.

    Each lag is scored by the Pearson correlation of the overlapping parts of
    the record, for lags up to 3/4 of its length. The first local peak after
    the zero-lag lobe reaching 80% of the strongest peak wins, so a period is
    preferred over its multiples; the lag is refined by a parabola through
    the peak and its neighbours.
    """
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or (len(x) - 1) * dt < 2 * expected_period:
        raise SeriesTooShort(
            f"{len(x)} samples at dt={dt} cover less than two periods of {expected_period}"
        )
    x = x - np.mean(x)
    n = len(x)
    if float(np.dot(x, x)) <= 1e-24 * n:
        raise FlatSeries("series has no variation")
    acf = _lagged_correlation(x, (3 * n) // 4)
    negative = np.flatnonzero(acf < 0)
    if negative.size == 0:
        raise FlatSeries("autocorrelation never decays; no oscillation found")
    inner = np.arange(max(negative[0], 1), len(acf) - 1)
    peaks = inner[(acf[inner] > acf[inner - 1]) & (acf[inner] >= acf[inner + 1])]
    if peaks.size == 0:
        raise FlatSeries("no autocorrelation peak after the zero-lag lobe")
    strongest = float(np.max(acf[peaks]))
    lag = int(peaks[np.argmax(acf[peaks] >= 0.8 * strongest)])
    left, mid, right = acf[lag - 1], acf[lag], acf[lag + 1]
    curve = left - 2 * mid + right
    shift = 0.5 * (left - right) / curve if curve < 0 else 0.0
    return (lag + shift) * dt
