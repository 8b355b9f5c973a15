import json
import subprocess
import sys

import numpy as np
import pytest

from helikon.cli import main
from helikon.surface import read_obj


def run_cli(args):
    return main(args)


def test_solve_writes_schema(tmp_path, h1):
    out = tmp_path / "sol.json"
    code = run_cli(["solve", "--k", "1", "--theta-lo", "1.86", "--theta-hi", "1.95",
                    "--out", str(out)])
    assert code == 0
    sol = json.loads(out.read_text())
    for key in ("k", "theta", "b", "a", "residuals", "residues",
                "axis_turning", "iterations", "version"):
        assert key in sol
    assert sol["theta"] == pytest.approx(h1.theta_angle, abs=1e-7)
    assert abs(sol["residuals"]["horiz"]) < 1e-6
    assert abs(sol["residuals"]["vert"]) < 1e-6
    assert abs(sol["residuals"]["cross_check"]) < 1e-6
    assert abs(sol["axis_turning"]) < 1e-3          # no winding at k = 1
    assert sol["abel_defect"] < 1e-6


def test_solve_tighter_tolerance_consistent(tmp_path, h1):
    out = tmp_path / "sol9.json"
    code = run_cli(["solve", "--k", "1", "--theta-lo", "1.89", "--theta-hi", "1.93",
                    "--tol-v", "1e-9", "--out", str(out)])
    assert code == 0
    sol = json.loads(out.read_text())
    assert sol["theta"] == pytest.approx(h1.theta_angle, abs=1e-7)
    assert sol["b"] == pytest.approx(h1.b, abs=1e-7)


def test_solve_rejects_inadmissible_k(tmp_path):
    assert run_cli(["solve", "--k", "0.4", "--out", str(tmp_path / "x.json")]) == 1


def test_solve_failure_exit_code(tmp_path):
    out = tmp_path / "fail.json"
    code = run_cli(["solve", "--k", "1", "--theta-lo", "1.30", "--theta-hi", "1.42",
                    "--out", str(out)])
    assert code == 2
    payload = json.loads(out.read_text())
    assert "scan_table" in payload


def test_sweep_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--k", "1", "--theta-lo", "1.88", "--theta-hi", "1.93",
            "--theta-n", "2", "--b-lo", "0.55", "--b-hi", "0.9", "--b-n", "2"]
    assert run_cli(args + ["--jobs", "1", "--out", str(a)]) == 0
    assert run_cli(args + ["--jobs", "4", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().strip().splitlines()
    assert lines[0] == "k,theta,b,horiz_residual,vert_residual,quad_err,flag"
    assert len(lines) == 5


def test_sweep_vertical_signs(tmp_path):
    out = tmp_path / "s.csv"
    assert run_cli(["sweep", "--k", "1", "--theta-lo", "1.9", "--theta-hi", "1.91",
                    "--theta-n", "1", "--b-lo", "0.52", "--b-hi", "0.97",
                    "--b-n", "6", "--out", str(out)]) == 0
    rows = [ln.split(",") for ln in out.read_text().strip().splitlines()[1:]]
    vert = [float(r[4]) for r in rows if r[6] == "ok"]
    assert min(vert) < 0 < max(vert)


def test_mesh_helicoid_mode(tmp_path):
    out = tmp_path / "hel.obj"
    rep = tmp_path / "hel.json"
    code = run_cli(["mesh", "--helicoid", "--k", "1", "--res", "12",
                    "--out", str(out), "--report", str(rep)])
    assert code == 0
    payload = json.loads(rep.read_text())
    assert payload["closed_form_max_error"] < 1e-8
    mesh = read_obj(str(out))
    assert len(mesh.vertices) == 13 * 13


def test_mesh_from_solution(tmp_path, h1):
    sol = tmp_path / "sol.json"
    sol.write_text(json.dumps({"k": 1.0, "theta": h1.theta_angle, "b": h1.b}))
    out = tmp_path / "h1.obj"
    rep = tmp_path / "h1rep.json"
    code = run_cli(["mesh", "--from", str(sol), "--res", "16", "--cutoff", "0.08",
                    "--copies", "3", "--out", str(out), "--report", str(rep)])
    assert code == 0
    payload = json.loads(rep.read_text())
    assert payload["symmetry"]["axis_max_xy"] < 1e-5
    mesh = read_obj(str(out))
    assert len(mesh.vertices) % 3 == 0


def test_mesh_unsolved_needs_force(tmp_path):
    code = run_cli(["mesh", "--k", "1", "--theta", "1.6", "--b", "0.8",
                    "--res", "8", "--out", str(tmp_path / "x.obj")])
    assert code == 2
    code = run_cli(["mesh", "--k", "1", "--theta", "1.6", "--b", "0.8", "--force",
                    "--res", "8", "--out", str(tmp_path / "x.obj")])
    assert code == 0


def test_verify_battery_passes(tmp_path):
    out = tmp_path / "verify.json"
    assert run_cli(["verify", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["all_pass"] is True
    assert len(payload["checks"]) >= 10


def test_verify_only_filter(tmp_path):
    out = tmp_path / "v.json"
    assert run_cli(["verify", "--only", "theta", "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    names = [c["name"] for c in payload["checks"]]
    assert names and all("theta" in n for n in names)


def test_verify_injection_negative_control(tmp_path):
    out = tmp_path / "v.json"
    code = run_cli(["verify", "--only", "quasi", "--inject", "theta_quasiperiodicity",
                    "--out", str(out)])
    assert code == 2
    payload = json.loads(out.read_text())
    assert not payload["checks"][0]["pass"]


def test_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "helikon.cli", "verify",
                           "--only", "annulus"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS" in proc.stdout


def test_solve_determinism_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["solve", "--k", "1", "--theta-lo", "1.89", "--theta-hi", "1.93"]
    assert run_cli(args + ["--out", str(a)]) == 0
    assert run_cli(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
