import json

import numpy as np
import pytest

from conftest import planar_arm
from scenarios import blocked_midpoint, two_link_ik
from trajenergy.avoidance import Obstacle, Scene, save_scene
from trajenergy.cli import main
from trajenergy.csvio import read_series_csv, trajectory_columns, write_series_csv
from trajenergy.model import save_robot


def run(*argv):
    return main([str(a) for a in argv])


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


def test_plan_default_schema(tmp_path):
    assert run("plan", "--generator", "cubic", "--out", tmp_path) == 0
    cols = read_series_csv(tmp_path / "trajectory.csv")
    expected = ["t"] + [f"{p}{j}" for p in "qva" for j in range(1, 8)]
    assert list(cols) == expected
    assert cols["t"][-1] == pytest.approx(2.0)
    assert (tmp_path / "trajectory.csv").read_bytes().count(b"\r") == 0


def test_free_space_avoidance_is_a_no_op(tmp_path):
    scene = tmp_path / "empty.json"
    save_scene(Scene(), scene)
    assert run("plan", "--no-avoid", "--out", tmp_path / "a") == 0
    assert run("plan", "--avoid", "--scene", scene, "--out", tmp_path / "b") == 0
    a = (tmp_path / "a" / "trajectory.csv").read_bytes()
    assert a == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_missing_robot_file(tmp_path, capsys):
    missing = tmp_path / "absent_robot.json"
    assert run("plan", "--robot", missing, "--out", tmp_path) == 1
    assert str(missing) in capsys.readouterr().err


def test_malformed_robot_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run("report", "--robot", bad, "--out", tmp_path) == 1


def test_unknown_config_key(tmp_path):
    cfg = write_json(tmp_path / "cfg.json", {"generator": "cubic", "colour": "red"})
    assert run("plan", "--config", cfg, "--out", tmp_path) == 1


def test_dimension_mismatch_is_config_error(tmp_path):
    assert run("plan", "--start", 0, 0, "--goal", 1, 1, "--out", tmp_path) == 1


def test_report_outputs(tmp_path):
    assert run("report", "--generator", "sinusoidal", "--out", tmp_path) == 0
    for name in ("metrics.csv", "energy.svg", "accel.svg", "cumulative.svg", "velocity.svg"):
        assert (tmp_path / name).exists()
    cols = read_series_csv(tmp_path / "metrics.csv")
    assert list(cols) == ["t", "power", "accel_norm", "cum_energy", "vel_mag"]
    assert np.all(np.diff(cols["cum_energy"]) >= 0)
    svg = (tmp_path / "cumulative.svg").read_text()
    assert 'viewBox="0 0 800 600"' in svg


def test_report_is_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("report", "--generator", "sinusoidal", "--out", tmp_path / d) == 0
    for name in ("metrics.csv", "energy.svg", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_lambda_raises_cumulative_energy(tmp_path):
    assert run("report", "--lambda", 0, "--out", tmp_path / "l0") == 0
    assert run("report", "--lambda", 1, "--out", tmp_path / "l1") == 0
    e0 = read_series_csv(tmp_path / "l0" / "metrics.csv")["cum_energy"][-1]
    e1 = read_series_csv(tmp_path / "l1" / "metrics.csv")["cum_energy"][-1]
    assert e1 > e0


def sinusoid_cfg(path, **extra):
    data = {"generator": "sinusoidal", "goal": [0.8] * 7, "duration": 1.5, "lambda": 1.0}
    data.update(extra)
    return write_json(path, data)


def test_compare_time_dilation_law(tmp_path, capsys):
    a = sinusoid_cfg(tmp_path / "unscaled.json")
    b = sinusoid_cfg(tmp_path / "scaled.json", time_scale=2.0)
    assert run("compare", a, b, "--out", tmp_path) == 0
    rows = (tmp_path / "compare.csv").read_text().splitlines()
    header = rows[0].split(",")
    values = [dict(zip(header, r.split(","))) for r in rows[1:]]
    ratio = float(values[1]["lambda_term"]) / float(values[0]["lambda_term"])
    assert ratio == pytest.approx(0.5, abs=1e-6)
    assert float(values[1]["lambda_term_delta_pct"]) == pytest.approx(-50.0, abs=1e-4)
    assert "scaled" in capsys.readouterr().out


def test_compare_identical(tmp_path):
    a = sinusoid_cfg(tmp_path / "a.json")
    assert run("compare", a, a, "--out", tmp_path) == 0
    rows = (tmp_path / "compare.csv").read_text().splitlines()
    header = rows[0].split(",")
    second = dict(zip(header, rows[2].split(",")))
    assert all(float(second[k]) == 0 for k in header if k.endswith("_delta_pct"))


def test_compare_different_robots(tmp_path):
    robot = tmp_path / "two.json"
    save_robot(planar_arm([1.0, 1.0]), robot)
    a = sinusoid_cfg(tmp_path / "a.json")
    b = write_json(tmp_path / "b.json", {"robot": "two.json", "goal": [0.3, 0.3]})
    assert run("compare", a, b, "--out", tmp_path) == 1


def test_compare_parallel_matches_serial(tmp_path):
    a = sinusoid_cfg(tmp_path / "a.json")
    b = sinusoid_cfg(tmp_path / "b.json", time_scale=1.5)
    assert run("compare", a, b, "--out", tmp_path / "serial") == 0
    assert run("compare", a, b, "--jobs", 2, "--out", tmp_path / "parallel") == 0
    serial = (tmp_path / "serial" / "compare.csv").read_bytes()
    assert serial == (tmp_path / "parallel" / "compare.csv").read_bytes()


def blocked_files(tmp_path, k=1.0):
    model, _, scene = blocked_midpoint()
    robot = tmp_path / "planar.json"
    save_robot(model, robot)
    ys = np.linspace(-0.7, 0.7, 41)
    wps = [{"t": float(t), "q": two_link_ik(1.5, y).tolist()} for t, y in zip(np.linspace(0, 2, 41), ys)]
    waypoints = write_json(tmp_path / "line.json", wps)
    o = scene.obstacles[0]
    scene_path = tmp_path / "scene.json"
    save_scene(Scene((Obstacle(o.center, o.radius, k, o.d_safe),)), scene_path)
    return robot, waypoints, scene_path


def test_avoidance_run_succeeds(tmp_path):
    robot, wps, scene = blocked_files(tmp_path)
    code = run("report", "--robot", robot, "--waypoints", wps, "--scene", scene, "--avoid",
               "--out", tmp_path)
    assert code == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["avoidance"]["converged"]
    assert summary["avoidance"]["final_clearance"] >= 0.95 * 0.3


def test_not_converged_exit_code(tmp_path):
    robot, wps, scene = blocked_files(tmp_path, k=1e-6)
    code = run("plan", "--robot", robot, "--waypoints", wps, "--scene", scene, "--avoid",
               "--out", tmp_path)
    assert code == 2


def test_blocked_endpoint_exit_code(tmp_path):
    scene = tmp_path / "scene.json"
    save_scene(Scene((Obstacle((2.1, 0.0, 0.2), 0.1, 1.0, 0.3),)), scene)
    assert run("plan", "--scene", scene, "--avoid", "--out", tmp_path) == 2


def test_csv_round_trip(tmp_path, rng):
    cols = {"t": np.linspace(0, 1, 50), "x": rng.normal(size=50) * 1e-7, "y": rng.normal(size=50) * 1e9}
    cols["x"][3] = 1 / 3
    write_series_csv(tmp_path / "c.csv", cols)
    back = read_series_csv(tmp_path / "c.csv")
    for key in cols:
        assert back[key].tobytes() == cols[key].tobytes()


def test_trajectory_csv_round_trip(tmp_path):
    from trajenergy.experiment import ExperimentConfig, plan

    traj = plan(ExperimentConfig()).trajectory
    t, q, qd, qdd = traj.sample()
    assert run("plan", "--out", tmp_path) == 0
    back = read_series_csv(tmp_path / "trajectory.csv")
    for key, arr in trajectory_columns(t, q, qd, qdd).items():
        assert back[key].tobytes() == arr.tobytes()


def test_log_level_env(tmp_path, monkeypatch):
    monkeypatch.setenv("TRAJ_ENERGY_LOG", "debug")
    assert run("plan", "--out", tmp_path) == 0
