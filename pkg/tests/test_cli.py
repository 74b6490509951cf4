import json
import math
import subprocess
import sys

import numpy as np
import pytest

from dmpvol import serialize
from dmpvol.cli import main, parse_point


@pytest.fixture(scope="module")
def model_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "spiral.json"
    assert main(["learn", "builtin:spiral", "--out", str(path)]) == 0
    return path


def test_parse_point():
    np.testing.assert_array_equal(parse_point("pi,0.5"), [math.pi, 0.5])
    np.testing.assert_array_equal(parse_point("-π, 1e-3"), [-math.pi, 1e-3])


def test_learn_is_byte_identical(tmp_path, model_file):
    again = tmp_path / "again.json"
    assert main(["learn", "builtin:spiral", "--out", str(again)]) == 0
    assert again.read_bytes() == model_file.read_bytes()


def test_learn_from_csv_file(tmp_path, spiral, model_file):
    # The CSV round trip is exact, so the model equals the builtin one.
    demo = tmp_path / "demo.csv"
    serialize.write_trajectory_csv(demo, spiral)
    out = tmp_path / "m.json"
    assert main(["learn", str(demo), "--out", str(out)]) == 0
    assert out.read_bytes() == model_file.read_bytes()


def test_learn_malformed_csv_names_row(tmp_path, capsys):
    demo = tmp_path / "demo.csv"
    demo.write_text("t,x1\n0,0\n0.5,zero\n1,1\n")
    assert main(["learn", str(demo)]) == 1
    assert "demo.csv:3" in capsys.readouterr().err


def test_rollout_to_new_goal(tmp_path, model_file):
    out = tmp_path / "r.csv"
    assert main(["rollout", str(model_file), "--goal", "pi,0.5", "--horizon", "3",
                 "--out", str(out)]) == 0
    tr = serialize.read_trajectory_csv(out)
    assert np.linalg.norm(tr.positions[-1] - [math.pi, 0.5]) <= 1e-2


def test_rollout_tau_doubles_duration(tmp_path, model_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["rollout", str(model_file), "--out", str(a)]) == 0
    assert main(["rollout", str(model_file), "--tau", "2", "--dt", "2e-3", "--out", str(b)]) == 0
    ta, tb = serialize.read_trajectory_csv(a), serialize.read_trajectory_csv(b)
    assert tb.duration == pytest.approx(2 * ta.duration)
    np.testing.assert_array_equal(ta.positions, tb.positions)


def test_rollout_missing_model(tmp_path, capsys):
    assert main(["rollout", str(tmp_path / "none.json")]) == 3
    assert "i/o error" in capsys.readouterr().err


def test_rollout_wrong_goal_dimension(model_file):
    assert main(["rollout", str(model_file), "--goal", "1,2,3"]) == 1


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as info:
        main(["rollout"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["rollout", "m.json", "--dt", "-1"])
    assert info.value.code == 1


def test_experiment_negative_gain_fails_fast(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"experiment": "one-obstacle", "output": str(tmp_path / "o"),
                               "methods": [{"method": "static_volume", "amplitude": -10}]}))
    assert main(["experiment", "--config", str(cfg)]) == 1
    assert "amplitude" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_experiment_needs_output(capsys):
    assert main(["experiment", "one-obstacle"]) == 1


def test_one_obstacle_experiment_outputs(tmp_path):
    out = tmp_path / "one"
    assert main(["experiment", "one-obstacle", "--out", str(out), "--no-timestamp"]) == 0
    names = sorted(p.name for p in out.iterdir())
    assert names == ["dynamic_point.csv", "dynamic_volume.csv", "plot.svg", "reference.csv",
                     "report.json", "static_point.csv", "static_volume.csv",
                     "steering_angle.csv"]
    report = json.loads((out / "report.json").read_text())
    assert report["experiment"] == "one-obstacle"
    for run in report["runs"]:
        assert run["status"] == "ok"
        for key in ("max_deviation", "max_accel_norm", "min_clearance", "final_goal_error"):
            assert isinstance(run[key], float)


def test_failed_method_is_reported(tmp_path):
    # A start inside the obstacle makes the volumetric method fail while
    # the point method still runs.
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({
        "experiment": "one-obstacle",
        "obstacles": [{"shape": {"center": [0.0, 0.0], "axes": [0.2, 0.2]}}],
        "methods": [{"method": "static_point", "eta": 1, "p0": 0.1},
                    {"method": "static_volume", "amplitude": 10, "eta": 1}],
    }))
    out = tmp_path / "o"
    assert main(["experiment", "--config", str(cfg), "--out", str(out), "--no-timestamp"]) == 2
    report = json.loads((out / "report.json").read_text())
    assert [r["status"] for r in report["runs"]] == ["ok", "failed"]
    assert "InsideObstacleError" in report["runs"][1]["error"]
    assert (out / "static_point.csv").exists()


def test_metrics_command(tmp_path, model_file, capsys):
    ref = tmp_path / "ref.csv"
    assert main(["rollout", str(model_file), "--out", str(ref)]) == 0
    shapes = tmp_path / "shapes.json"
    shapes.write_text(json.dumps([{"center": [-0.5, 0.7], "axes": [0.3, 0.2]}]))
    assert main(["metrics", str(ref), str(ref), "--obstacles", str(shapes)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["max_deviation"] == 0.0
    assert report["collided"] is True


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dmpvol", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "experiment" in proc.stdout
