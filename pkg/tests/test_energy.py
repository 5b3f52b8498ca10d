import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import trapezoid
from trajenergy.energy import (
    EnergyParams,
    compare_energy,
    cumulative_trapezoid,
    energy_cost,
    integrate_series,
    zero_torque,
)
from trajenergy.errors import DimensionError, TooFewSamples, TooFewTrajectories, ValidationError
from trajenergy.model import default_seven_dof
from trajenergy.trajgen import (
    SinusoidalProfile,
    Trajectory,
    dilate,
    fit_cubic,
    sinusoidal,
    spline_through_waypoints,
)


def still(n=1, T=2.0, value=0.0):
    q = np.full(n, value)
    return Trajectory((fit_cubic(q, np.zeros(n), q, np.zeros(n), 0.0, T),))


def ramp_torque(times, q, qd, qdd):
    return times[:, None] * np.ones_like(q)


def test_integrate_constant():
    assert integrate_series(np.ones(10), 1.0) == 9.0


def test_integrate_affine_exact():
    assert integrate_series(np.linspace(0, 1, 11), 0.1) == pytest.approx(0.5, abs=1e-15)


def test_integrate_hand_case():
    assert integrate_series([0.0, 0.25, 1.0], 0.5) == 0.375


def test_too_few_samples():
    with pytest.raises(TooFewSamples):
        integrate_series([1.0], 0.1)


def test_params_validation():
    with pytest.raises(ValidationError):
        EnergyParams(lam=-1)
    with pytest.raises(ValidationError):
        EnergyParams(dt=0)


def test_stationary_without_gravity_costs_nothing():
    model = default_seven_dof().with_gravity((0, 0, 0))
    for lam in (0.0, 0.1, 5.0):
        assert energy_cost(model, still(7, value=0.4), EnergyParams(lam)).total == 0.0


def test_holding_pose_against_gravity_costs_energy():
    assert energy_cost(default_seven_dof(), still(7), EnergyParams(0.0)).total > 0


def test_constant_torque_seam():
    out = energy_cost(None, still(), EnergyParams(0.0), torque=lambda t, q, qd, qdd: np.ones_like(q))
    assert out.total == pytest.approx(2.0, abs=1e-12)


def test_ramp_torque_hand_trapezoid():
    out = energy_cost(None, still(T=1.0), EnergyParams(0.0, dt=0.5), torque=ramp_torque)
    assert out.total == 0.375


def test_quadrature_second_order():
    errors = []
    for dt in (0.1, 0.05, 0.025, 0.0125):
        out = energy_cost(None, still(T=1.0), EnergyParams(0.0, dt=dt), torque=ramp_torque)
        errors.append(abs(out.total - 1 / 3))
    for coarse, fine in zip(errors, errors[1:]):
        assert 3.5 <= coarse / fine <= 4.5


def test_breakdown_invariants(rng):
    model = default_seven_dof()
    traj = spline_through_waypoints(
        [(0, np.zeros(7)), (0.8, rng.uniform(-1, 1, 7)), (2, rng.uniform(-1, 1, 7))]
    )
    out = energy_cost(model, traj, EnergyParams(0.3))
    assert out.total == pytest.approx(out.torque_term + out.velocity_term, abs=1e-9)
    assert out.total == pytest.approx(np.sum(out.per_joint), abs=1e-9)
    assert np.all(out.per_joint >= 0) and np.all(out.series >= 0)
    assert integrate_series(out.series, out.time[1]) == pytest.approx(out.total, rel=1e-12)


def test_additivity(rng):
    model = default_seven_dof()
    traj = spline_through_waypoints([(0, np.zeros(7)), (1, rng.uniform(-1, 1, 7))])
    out = energy_cost(model, traj, EnergyParams(0.2, dt=0.01))
    k = (len(out.time) - 1) // 2
    dt = out.time[1] - out.time[0]
    halves = integrate_series(out.series[: k + 1], dt) + integrate_series(out.series[k:], dt)
    assert halves == pytest.approx(out.total, abs=1e-6)


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 10), st.floats(1e-3, 10))
def test_strictly_increasing_in_lambda(lam, bump):
    model = default_seven_dof()
    traj = sinusoidal(SinusoidalProfile(np.zeros(7), np.full(7, 0.5), 1.5))
    low = energy_cost(model, traj, EnergyParams(lam)).total
    high = energy_cost(model, traj, EnergyParams(lam + bump)).total
    assert high > low


def test_lambda_only_scaling_law():
    traj = sinusoidal(SinusoidalProfile(np.zeros(3), [0.5, -1.0, 0.2], 1.0))
    base = energy_cost(None, traj, EnergyParams(1.0), torque=zero_torque).total
    for alpha in (1.3, 2.0, 4.0):
        scaled = energy_cost(None, dilate(traj, alpha), EnergyParams(1.0), torque=zero_torque)
        assert scaled.total * alpha == pytest.approx(base, abs=1e-6)


def test_velocity_term_matches_independent_trapezoid():
    traj = sinusoidal(SinusoidalProfile([0.0], [1.0], 2.0))
    out = energy_cost(None, traj, EnergyParams(0.5, dt=0.01), torque=zero_torque)
    w = math.pi / 2
    values = [0.5 * (0.5 * w * math.sin(w * k * 0.01)) ** 2 for k in range(201)]
    assert out.total == pytest.approx(trapezoid(values, 0.01), rel=1e-12)


def test_compare_ranks_scaled_first():
    traj = sinusoidal(SinusoidalProfile(np.zeros(7), np.full(7, 0.6), 1.0))
    ranks = compare_energy(
        default_seven_dof(),
        [("unscaled", traj), ("scaled", dilate(traj, 2.0))],
        EnergyParams(1.0),
        torque=zero_torque,
    )
    assert [r.name for r in ranks] == ["scaled", "unscaled"]
    ratio = ranks[0].breakdown.velocity_term / ranks[1].breakdown.velocity_term
    assert ratio == pytest.approx(0.5, abs=1e-6)
    assert ranks[0].delta_total == 0 and ranks[1].delta_total > 0


def test_compare_ties_keep_order():
    traj = sinusoidal(SinusoidalProfile(np.zeros(7), np.full(7, 0.6), 1.0))
    ranks = compare_energy(default_seven_dof(), [("a", traj), ("b", traj)])
    assert [r.name for r in ranks] == ["a", "b"]
    assert ranks[0].breakdown.total == ranks[1].breakdown.total


def test_compare_errors():
    traj = still(7)
    with pytest.raises(TooFewTrajectories):
        compare_energy(default_seven_dof(), [("only", traj)])
    with pytest.raises(DimensionError):
        compare_energy(default_seven_dof(), [("a", traj), ("b", still(2))])


def test_cumulative_is_nondecreasing_for_nonnegative_input(rng):
    out = cumulative_trapezoid(rng.uniform(0, 5, 100), 0.01)
    assert out[0] == 0 and np.all(np.diff(out) >= 0)
