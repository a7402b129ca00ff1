"""Command-line interface: subcommands, exit codes, determinism."""

import json
import subprocess
import sys

import numpy as np

from lagmech.trajectories import Trajectory

PY = [sys.executable, "-m", "lagmech"]


def run_cli(*args, **kwargs):
    return subprocess.run(PY + list(args), capture_output=True, text=True, **kwargs)


def write_config(tmp_path, name, payload):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_catalog_lists_builtins():
    out = run_cli("catalog")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    ids = [s["id"] for s in doc["systems"]]
    assert "SYS-D" in ids and "EUCLID" in ids


def test_inspect_euclid(tmp_path):
    cfg = write_config(tmp_path, "euclid.json", {
        "system": {"builtin": "EUCLID", "params": {"n": 2}},
        "samples": {"points": [{"x": [0.0, 0.0], "y": [1.0, 0.0]}]},
    })
    out = run_cli("inspect", cfg)
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    pt = doc["points"][0]
    assert pt["g"] == [[1, 0], [0, 1]]
    assert pt["G0"] == [0, 0]
    assert pt["E"] == 1
    assert pt["power"] == 0


def test_inspect_liouville_connection_shift(tmp_path):
    cfg = write_config(tmp_path, "se.json", {
        "system": {"builtin": "SYS-E", "params": {"e": -1.0, "base": "EUCLID"}},
        "samples": {"points": [{"x": [0.0, 0.0], "y": [1.0, 2.0]}]},
    })
    out = run_cli("inspect", cfg)
    assert out.returncode == 0
    pt = json.loads(out.stdout)["points"][0]
    n = np.array(pt["N"])
    n0 = np.array(pt["N0"])
    assert np.abs(n - n0 - 0.25 * np.eye(2)).max() <= 1e-10


def test_inspect_singular_point_exit_code(tmp_path):
    cfg = write_config(tmp_path, "sing.json", {
        "system": {"builtin": "SYS-C"},
        "samples": {"points": [
            {"x": [0.0, 0.0], "y": [1.0, 0.0]},
            {"x": [0.0, 0.0], "y": [1.0, 1.0]},
        ]},
    })
    out = run_cli("inspect", cfg)
    assert out.returncode == 3
    doc = json.loads(out.stdout)
    assert doc["points"][0]["error"] == "SingularMetric"
    assert "g" in doc["points"][1]  # healthy points still emitted


def test_classify_sys_d(tmp_path):
    cfg = write_config(tmp_path, "sysd.json", {
        "system": {"builtin": "SYS-D", "params": {"e": -0.5}},
        "samples": {"count": 25},
        "seed": 3,
    })
    out = run_cli("classify", cfg)
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["is_symplectic"] is True
    assert doc["is_metric"] is False
    assert doc["dissipative_at_samples"]["strict"] is True


def test_classify_param_override(tmp_path):
    cfg = write_config(tmp_path, "sysd2.json", {
        "system": {"builtin": "SYS-D", "params": {"e": -0.5}},
        "samples": {"count": 20},
    })
    out = run_cli("classify", cfg, "--param", "e=0.5")
    doc = json.loads(out.stdout)
    assert doc["dissipative_at_samples"]["weak"] is False


def test_verify_builtins_pass(tmp_path):
    for builtin, params in (("SYS-B", {}), ("SYS-D", {"e": -0.5})):
        cfg = write_config(tmp_path, f"v_{builtin}.json", {
            "system": {"builtin": builtin, "params": params},
            "samples": {"count": 20},
        })
        out = run_cli("verify", cfg)
        assert out.returncode == 0, out.stderr
        doc = json.loads(out.stdout)
        assert doc["offenders"] == []


def test_verify_reports_singular_points(tmp_path):
    cfg = write_config(tmp_path, "vs.json", {
        "system": {"builtin": "SYS-C"},
        "samples": {"points": [
            {"x": [0.0, 0.0], "y": [0.0, 1.3]},
            {"x": [0.0, 0.0], "y": [1.0, 1.0]},
        ]},
    })
    out = run_cli("verify", cfg)
    assert out.returncode == 3
    doc = json.loads(out.stdout)
    assert len(doc["singular_points"]) == 1


def test_verify_tolerance_failure_exit_code(tmp_path):
    cfg = write_config(tmp_path, "vt.json", {
        "system": {"builtin": "SYS-B"},
        "samples": {"count": 10},
        "tolerance": 1e-22,
    })
    out = run_cli("verify", cfg)
    assert out.returncode == 4
    doc = json.loads(out.stdout)
    assert doc["offenders"]


def test_config_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, "broken.json", {
        "system": {"n": 2, "lagrangian": "y1^2 + y2^2", "force": ["0"]},
    })
    out = run_cli("classify", cfg)
    assert out.returncode == 2


def test_parse_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, "badexpr.json", {
        "system": {"n": 1, "lagrangian": "y1^2 +"},
        "samples": {"box_x": [[-1, 1]], "box_y": [[-1, 1]], "count": 4},
    })
    out = run_cli("classify", cfg)
    assert out.returncode == 2


def test_simulate_dissipative_run(tmp_path):
    cfg = write_config(tmp_path, "sim.json", {
        "system": {"builtin": "SYS-A", "params": {"c": 0.1}},
        "initial": {"x": [1.0], "y": [0.0]},
        "integrator": {"step": 1e-3, "t_end": 3.0, "record_every": 50},
    })
    csv_path = str(tmp_path / "run.csv")
    out = run_cli("simulate", cfg, "--out", csv_path)
    assert out.returncode == 0
    audit = json.loads(out.stderr)
    assert audit["monotone_nonincreasing"] is True
    traj = Trajectory.from_csv(open(csv_path).read())
    assert traj.energy[-1] < traj.energy[0]


def test_simulate_csv_round_trip_full_precision(tmp_path):
    cfg = write_config(tmp_path, "sim2.json", {
        "system": {"builtin": "SYS-B"},
        "initial": {"x": [1.0, 0.0], "y": [0.7, 0.3]},
        "integrator": {"step": 1e-2, "t_end": 0.5, "record_every": 5},
    })
    csv_path = str(tmp_path / "run.csv")
    out = run_cli("simulate", cfg, "--out", csv_path, "--curve", "geodesic")
    assert out.returncode == 0
    text = open(csv_path).read()
    a = Trajectory.from_csv(text)
    b = Trajectory.from_csv(a.to_csv())
    assert np.array_equal(a.xs, b.xs)
    assert np.array_equal(a.energy, b.energy)


def test_simulate_singular_start_exit_code(tmp_path):
    cfg = write_config(tmp_path, "sim3.json", {
        "system": {"builtin": "SYS-C"},
        "initial": {"x": [0.0, 0.0], "y": [1.0, 0.0]},
        "integrator": {"step": 1e-3, "t_end": 1.0},
    })
    out = run_cli("simulate", cfg)
    assert out.returncode == 3


def test_simulate_horizontal_finsler_energy(tmp_path):
    cfg = write_config(tmp_path, "sim4.json", {
        "system": {"builtin": "SYS-D", "params": {"e": -0.5}},
        "initial": {"x": [0.0, 0.0], "y": [1.0, 0.5]},
        "integrator": {"step": 1e-3, "t_end": 2.0, "record_every": 100},
    })
    out = run_cli("simulate", cfg, "--curve", "horizontal")
    assert out.returncode == 0
    audit = json.loads(out.stderr)
    assert audit["relative_energy_drift"] <= 1e-6


def test_determinism_byte_identical(tmp_path):
    cfg = write_config(tmp_path, "det.json", {
        "system": {"builtin": "SYS-D", "params": {"e": -0.5}},
        "samples": {"count": 15, "mode": "random"},
        "seed": 42,
    })
    first = run_cli("classify", cfg)
    second = run_cli("classify", cfg)
    assert first.stdout == second.stdout
    assert first.returncode == second.returncode == 0
    third = run_cli("classify", cfg, "--seed", "43")
    assert third.stdout != first.stdout  # different sample draw


def test_cli_expression_system(tmp_path):
    cfg = write_config(tmp_path, "expr.json", {
        "system": {"n": 1, "lagrangian": "y1^2 - x1^2",
                   "force": ["-0.2*y1"], "params": {}},
        "samples": {"box_x": [[-1, 1]], "box_y": [[-2, 2]], "count": 10},
    })
    out = run_cli("verify", cfg)
    assert out.returncode == 0, out.stderr
    doc = json.loads(out.stdout)
    assert doc["residuals"]["evolution_spray_equation"] <= 1e-8
