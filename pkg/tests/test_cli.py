import json
import subprocess
import sys

import pytest

from qtraj import cli
from qtraj.errors import ParameterError

TUNNEL = {"mode": "tunnel", "potential": {"kind": "barrier", "U": 2, "q": 1}, "E": 1, "hbar": 1,
          "mass": 1, "grid": {"x_min": -5, "x_max": 5, "n_points": 1001}}
BOUND = {"mode": "bound", "potential": {"kind": "harmonic", "omega": 1}, "n_nodes": 1,
         "microstate": {"a": 2, "b": 1, "c": 0}}
TRAJ = {"mode": "trajectory", "potential": {"kind": "free"}, "E": 0.5,
        "microstate": {"a": 2, "b": 1, "c": 0.3}, "grid": {"x_min": 0, "x_max": 5, "n_points": 101}}


def _write(tmp_path, doc, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if isinstance(doc, dict) else doc)
    return str(p)


def _run(tmp_path, doc, *extra, out="out"):
    path = _write(tmp_path, doc)
    mode = doc["mode"] if isinstance(doc, dict) else "tunnel"
    return cli.main([mode, path, "--out", str(tmp_path / out), *extra])


def test_parse_schema_example():
    sc = cli.parse_scenario(json.dumps(TUNNEL).encode())
    assert sc.mode == "tunnel" and sc.barrier.E == 1.0 and sc.grid.n_points == 1001


@pytest.mark.parametrize("patch,fragment", [
    ({"microstate": {"a": 1, "b": 1, "c": 3}}, "ab − c²/4 must be positive"),
    ({"E": 2.5}, "sub-barrier energy required"),
    ({"extra": 1}, "unknown keys"),
    ({"grid": {"x_min": 1, "x_max": 0, "n_points": 5}}, "grid"),
    ({"grid": {"x_min": 0, "x_max": 1, "n_points": 1}}, "grid.n_points"),
    ({"potential": {"kind": "barrier", "U": 2}}, "potential"),
    ({"hbar": -1}, "hbar"),
    ({"microstate": {"a": 1}}, "microstate.b"),
])
def test_parse_errors_name_the_field(patch, fragment):
    with pytest.raises(ParameterError, match=fragment):
        cli.parse_scenario(json.dumps({**TUNNEL, **patch}))


def test_parse_malformed_json():
    with pytest.raises(ParameterError, match="malformed"):
        cli.parse_scenario(b"{not json")


def test_tunnel_run_outputs(tmp_path):
    assert _run(tmp_path, TUNNEL) == 0
    csv_text = (tmp_path / "out" / "tunnel.csv").read_text()
    assert csv_text.splitlines()[0] == "x,re_psi,im_psi,abs_psi,W,W1,current"
    assert len(csv_text.splitlines()) == 1002
    report = json.loads((tmp_path / "out" / "tunnel_report.json").read_text())
    assert report["passed"] and report["violations"] == []
    for key in ("max_qshje_residual", "current_variation", "max_interface_jump"):
        assert key in report


def test_bound_run_reports_action(tmp_path):
    assert _run(tmp_path, BOUND) == 0
    report = json.loads((tmp_path / "out" / "bound_report.json").read_text())
    assert abs(report["J_over_h"] - 2.0) < 1e-4
    header = (tmp_path / "out" / "bound.csv").read_text().splitlines()[0]
    assert header == "x,phi,theta,W1,microstate_wave"


def test_trajectory_and_verify(tmp_path):
    assert _run(tmp_path, TRAJ) == 0
    assert _run(tmp_path, {**TRAJ, "mode": "verify"}) == 0
    assert not (tmp_path / "out" / "verify.csv").exists()
    report = json.loads((tmp_path / "out" / "verify_report.json").read_text())
    assert report["max_divergence"] < 1e-6


def test_csv_is_deterministic_across_runs_and_threads(tmp_path, monkeypatch):
    texts = []
    for i, threads in enumerate(("1", "4", "0")):
        monkeypatch.setenv("QTRAJ_THREADS", threads)
        assert _run(tmp_path, TRAJ, out=f"o{i}") == 0
        texts.append((tmp_path / f"o{i}" / "trajectory.csv").read_bytes())
    assert texts[0] == texts[1] == texts[2]
    assert b"\r" not in texts[0]
    first_row = texts[0].decode().splitlines()[1].split(",")
    assert all(len(v.split("e")[0].replace("-", "").replace(".", "")) == 17 for v in first_row)


def test_exit_codes(tmp_path):
    bad = {**BOUND, "microstate": {"a": 1, "b": 1, "c": 3}}
    assert _run(tmp_path, bad) == 1
    assert _run(tmp_path, "{broken") == 1
    assert cli.main(["tunnel", str(tmp_path / "missing.json")]) == 1
    assert _run(tmp_path, TUNNEL, "--tolerance-scale", "1e-30") == 2
    assert _run(tmp_path, TUNNEL, "--tolerance-scale", "-1") == 1


def test_mode_mismatch_is_input_error(tmp_path):
    path = _write(tmp_path, TUNNEL)
    assert cli.main(["bound", path, "--out", str(tmp_path / "o")]) == 1


def test_bad_thread_setting(tmp_path, monkeypatch):
    monkeypatch.setenv("QTRAJ_THREADS", "many")
    assert _run(tmp_path, TRAJ) == 1


def test_module_entry_point(tmp_path):
    path = _write(tmp_path, BOUND)
    res = subprocess.run([sys.executable, "-m", "qtraj", "bound", path, "--out", str(tmp_path / "m")],
                         capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
