"""Joint-space trajectory generation.

Two piece types share one :class:`Trajectory` container:

* :class:`CubicSegment`, ``q(t) = a + b s + c s^2 + d s^3`` with local time
  ``s = t - t0`` (better conditioned than absolute time).
* :class:`SinusoidalSegment`, the raised-cosine rest-to-rest move
  ``q(t) = q0 + (q1 - q0) (1 - cos(pi s / T)) / 2``.

Velocity scaling is uniform time dilation ``q'(t) = q(t / alpha)``; both piece
types dilate exactly by rescaling their coefficients or duration.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateInterval,
    DimensionError,
    NonMonotonicTimes,
    OutOfRange,
    ParseError,
    TooFewWaypoints,
    ValidationError,
)

DEFAULT_DT = 0.01
_KNOT_TOL = 1e-9


def _vec(v) -> np.ndarray:
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if v.ndim != 1:
        raise DimensionError(f"expected a joint vector, got shape {v.shape}")
    return v


@dataclass(frozen=True, eq=False)
class CubicSegment:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    t0: float
    tf: float

    def __post_init__(self):
        if not self.tf > self.t0:
            raise DegenerateInterval(f"segment needs tf > t0, got [{self.t0}, {self.tf}]")
        coeffs = [_vec(getattr(self, k)) for k in "abcd"]
        if len({c.shape for c in coeffs}) != 1:
            raise DimensionError("cubic coefficients differ in length")
        for k, c in zip("abcd", coeffs):
            object.__setattr__(self, k, c)

    @property
    def n_joints(self) -> int:
        return len(self.a)

    def eval_many(self, t: np.ndarray):
        s = (np.asarray(t, dtype=float) - self.t0)[:, None]
        q = self.a + s * (self.b + s * (self.c + s * self.d))
        qd = self.b + s * (2 * self.c + 3 * s * self.d)
        qdd = 2 * self.c + 6 * s * self.d
        return q, qd, qdd

    def jerk(self) -> np.ndarray:
        return 6 * self.d

    def dilated(self, alpha: float) -> CubicSegment:
        return CubicSegment(
            self.a,
            self.b / alpha,
            self.c / alpha**2,
            self.d / alpha**3,
            self.t0 * alpha,
            self.tf * alpha,
        )

    def peak_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-joint max |qd| and max |qdd| over the segment, exactly."""
        h = self.tf - self.t0
        cand = [np.zeros(self.n_joints), np.full(self.n_joints, h)]
        with np.errstate(divide="ignore", invalid="ignore"):
            vertex = np.where(self.d != 0, -self.c / (3 * self.d), 0.0)
        cand.append(np.clip(vertex, 0.0, h))
        speed = np.max([np.abs(self.b + s * (2 * self.c + 3 * s * self.d)) for s in cand], axis=0)
        accel = np.maximum(np.abs(2 * self.c), np.abs(2 * self.c + 6 * h * self.d))
        return speed, accel


@dataclass(frozen=True, eq=False)
class SinusoidalSegment:
    q_start: np.ndarray
    q_end: np.ndarray
    t0: float
    tf: float

    def __post_init__(self):
        if not self.tf > self.t0:
            raise DegenerateInterval(f"segment needs tf > t0, got [{self.t0}, {self.tf}]")
        q0, q1 = _vec(self.q_start), _vec(self.q_end)
        if q0.shape != q1.shape:
            raise DimensionError("q_start and q_end differ in length")
        object.__setattr__(self, "q_start", q0)
        object.__setattr__(self, "q_end", q1)

    @property
    def n_joints(self) -> int:
        return len(self.q_start)

    def eval_many(self, t: np.ndarray):
        T = self.tf - self.t0
        w = math.pi / T
        phase = w * (np.asarray(t, dtype=float) - self.t0)[:, None]
        half = 0.5 * (self.q_end - self.q_start)
        q = self.q_start + half * (1.0 - np.cos(phase))
        qd = half * w * np.sin(phase)
        qdd = half * w * w * np.cos(phase)
        return q, qd, qdd

    def dilated(self, alpha: float) -> SinusoidalSegment:
        return SinusoidalSegment(self.q_start, self.q_end, self.t0 * alpha, self.tf * alpha)

    def peak_rates(self) -> tuple[np.ndarray, np.ndarray]:
        T = self.tf - self.t0
        dq = np.abs(self.q_end - self.q_start)
        return math.pi * dq / (2 * T), math.pi**2 * dq / (2 * T * T)


@dataclass(frozen=True)
class SinusoidalProfile:
    q_start: Sequence[float]
    q_end: Sequence[float]
    duration: float

    def __post_init__(self):
        if not self.duration > 0:
            raise DegenerateInterval(f"duration must be > 0, got {self.duration}")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Contiguous piecewise trajectory starting at t = 0.

    ``dt`` is the nominal sampling step. Sampling uses the uniform grid with
    the fewest intervals whose step does not exceed ``dt``, so the final
    sample always lands on ``duration``.
    """

    segments: tuple
    dt: float = DEFAULT_DT

    def __post_init__(self):
        segs = tuple(self.segments)
        object.__setattr__(self, "segments", segs)
        if not segs:
            raise ValidationError("segments", "trajectory needs at least one segment")
        if segs[0].t0 != 0.0:
            raise ValidationError("segments", "trajectory must start at t = 0")
        if len({s.n_joints for s in segs}) != 1:
            raise DimensionError("segments differ in joint count")
        for left, right in zip(segs, segs[1:]):
            if abs(left.tf - right.t0) > _KNOT_TOL * max(1.0, abs(left.tf)):
                raise ValidationError("segments", f"gap between {left.tf} and {right.t0}")
            ql, vl, _ = left.eval_many(np.array([left.tf]))
            qr, vr, _ = right.eval_many(np.array([right.t0]))
            scale = max(1.0, float(np.max(np.abs(ql))))
            if np.max(np.abs(ql - qr)) > _KNOT_TOL * scale:
                raise ValidationError("segments", f"position jump at t = {right.t0}")
            if np.max(np.abs(vl - vr)) > _KNOT_TOL * max(1.0, float(np.max(np.abs(vl)))):
                raise ValidationError("segments", f"velocity jump at t = {right.t0}")
        if not 0 < self.dt <= self.duration:
            raise ValidationError("dt", f"need 0 < dt <= duration, got {self.dt}")
        object.__setattr__(self, "_knots", [s.t0 for s in segs[1:]])

    @property
    def duration(self) -> float:
        return self.segments[-1].tf

    @property
    def n_joints(self) -> int:
        return self.segments[0].n_joints

    def with_dt(self, dt: float) -> Trajectory:
        return Trajectory(self.segments, dt)

    def eval(self, t: float):
        """Position, velocity and acceleration at time ``t``."""
        if not 0.0 <= t <= self.duration:
            raise OutOfRange(f"t = {t} outside [0, {self.duration}]")
        seg = self.segments[bisect.bisect_right(self._knots, t)]
        q, qd, qdd = seg.eval_many(np.array([t]))
        return q[0], qd[0], qdd[0]

    def sample_times(self, dt: float | None = None) -> np.ndarray:
        dt = self.dt if dt is None else dt
        if not dt > 0:
            raise ValidationError("dt", f"must be > 0, got {dt}")
        steps = max(1, math.ceil(self.duration / dt - 1e-9))
        return np.linspace(0.0, self.duration, steps + 1)

    def sample(self, dt: float | None = None):
        """Sampled ``(t, q, qd, qdd)`` arrays; joint arrays have shape (N, n)."""
        return self.sample_at(self.sample_times(dt))

    def sample_at(self, times):
        times = np.asarray(times, dtype=float)
        if times.size and (times.min() < 0 or times.max() > self.duration):
            raise OutOfRange("sample times outside trajectory domain")
        idx = np.searchsorted(self._knots, times, side="right")
        n = self.n_joints
        q = np.empty((times.size, n))
        qd = np.empty_like(q)
        qdd = np.empty_like(q)
        for k in np.unique(idx):
            mask = idx == k
            q[mask], qd[mask], qdd[mask] = self.segments[k].eval_many(times[mask])
        return times, q, qd, qdd

    def peak_rates(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-joint peak |velocity| and |acceleration| over the whole trajectory."""
        rates = [s.peak_rates() for s in self.segments]
        return np.max([r[0] for r in rates], axis=0), np.max([r[1] for r in rates], axis=0)


def evaluate(traj: Trajectory, t: float):
    return traj.eval(t)


def fit_cubic(q0, v0, qf, vf, t0: float, tf: float) -> CubicSegment:
    """Cubic matching position and velocity at both ends of [t0, tf]."""
    if not tf > t0:
        raise DegenerateInterval(f"need tf > t0, got t0={t0}, tf={tf}")
    q0, v0, qf, vf = (_vec(x) for x in (q0, v0, qf, vf))
    if not (q0.shape == v0.shape == qf.shape == vf.shape):
        raise DimensionError("boundary vectors differ in length")
    h = tf - t0
    dq = qf - q0
    c = (3 * dq - (2 * v0 + vf) * h) / h**2
    d = (-2 * dq + (v0 + vf) * h) / h**3
    return CubicSegment(q0, v0, c, d, t0, tf)


def _check_waypoints(waypoints):
    if len(waypoints) < 2:
        raise TooFewWaypoints(f"need at least 2 waypoints, got {len(waypoints)}")
    times = np.array([float(t) for t, _ in waypoints])
    if np.any(np.diff(times) <= 0):
        raise NonMonotonicTimes("waypoint times must be strictly increasing")
    qs = [_vec(q) for _, q in waypoints]
    if len({q.shape for q in qs}) != 1:
        raise DimensionError("waypoints differ in joint count")
    return times - times[0], np.array(qs)


def spline_through_waypoints(waypoints, dt: float = DEFAULT_DT) -> Trajectory:
    """C1 cubic spline through ``(t, q)`` waypoints, at rest at both ends.

    Interior knot velocities use the central difference of the neighbouring
    waypoints. Times are shifted so the first waypoint is at t = 0.
    """
    times, qs = _check_waypoints(waypoints)
    vel = np.zeros_like(qs)
    vel[1:-1] = (qs[2:] - qs[:-2]) / (times[2:] - times[:-2])[:, None]
    segments = [
        fit_cubic(qs[k], vel[k], qs[k + 1], vel[k + 1], times[k], times[k + 1])
        for k in range(len(times) - 1)
    ]
    return Trajectory(tuple(segments), min(dt, times[-1]))


def sinusoidal(profile: SinusoidalProfile, dt: float = DEFAULT_DT) -> Trajectory:
    seg = SinusoidalSegment(profile.q_start, profile.q_end, 0.0, float(profile.duration))
    return Trajectory((seg,), dt)


def sinusoidal_through_waypoints(waypoints, dt: float = DEFAULT_DT) -> Trajectory:
    """Chain of raised-cosine moves, coming to rest at every waypoint."""
    times, qs = _check_waypoints(waypoints)
    segments = [
        SinusoidalSegment(qs[k], qs[k + 1], times[k], times[k + 1]) for k in range(len(times) - 1)
    ]
    return Trajectory(tuple(segments), min(dt, times[-1]))


def dilate(traj: Trajectory, alpha: float) -> Trajectory:
    """Slow ``traj`` down by ``alpha``: q'(t) = q(t / alpha), sampling step kept."""
    if not alpha > 0:
        raise ValueError(f"alpha must be > 0, got {alpha}")
    if alpha == 1.0:
        return traj
    return Trajectory(tuple(s.dilated(alpha) for s in traj.segments), traj.dt)


def velocity_scale_factor(traj: Trajectory, v_max, a_max) -> float:
    """Smallest alpha >= 1 making the dilated trajectory respect both limits."""
    speed, accel = traj.peak_rates()
    v_max = np.broadcast_to(np.asarray(v_max, dtype=float), speed.shape)
    a_max = np.broadcast_to(np.asarray(a_max, dtype=float), accel.shape)
    return max(1.0, float(np.max(speed / v_max)), math.sqrt(float(np.max(accel / a_max))))


def scale_velocity(traj: Trajectory, v_max, a_max) -> Trajectory:
    return dilate(traj, velocity_scale_factor(traj, v_max, a_max))


def load_waypoints(path):
    """Read a JSON array of ``{"t": seconds, "q": [...]}`` objects."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read waypoint file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed waypoint file {path}: {exc}") from exc
    if not isinstance(data, list):
        raise ValidationError("waypoints", "top level must be an array")
    out = []
    for i, entry in enumerate(data):
        if not isinstance(entry, dict) or set(entry) != {"t", "q"}:
            raise ValidationError(f"waypoints[{i}]", "expected an object with keys t and q")
        try:
            t = float(entry["t"])
            q = [float(v) for v in entry["q"]]
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"waypoints[{i}]", "t and q must be numeric") from exc
        out.append((t, q))
    return out
