import csv
import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from optbankrupt.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_baseline(capsys):
    code, out, _ = run(capsys, "solve", "--config", str(CONFIGS / "baseline.json"))
    assert code == 0
    rep = json.loads(out)
    assert rep["schema_version"] == 1 and rep["case"] == "Case 2"
    assert rep["lambda_star"] == pytest.approx(0.3110, rel=5e-4)
    assert rep["x_tilde"] == pytest.approx(6.3164, rel=5e-4)
    assert all(rep["residual_audit"]["passes"].values())


def test_solve_invalid_gamma(capsys):
    code, _, err = run(capsys, "solve", "--param", "gamma=0.06")
    assert code == 1 and "gamma_condition" in err


def test_solve_no_case(capsys):
    code, _, err = run(capsys, "solve", "--param", "F=2", "--param", "d=0.1")
    assert code == 2 and "NoCaseAdmissible" in err


def test_solve_override_k(capsys):
    code, out, _ = run(capsys, "solve", "--param", "k=4")
    assert json.loads(out)["x_bar"] == pytest.approx(12.4239, rel=5e-4)


def test_solve_csv(capsys, tmp_path):
    dest = tmp_path / "r.csv"
    assert main(["solve", "--format", "csv", "--out", str(dest)]) == 0
    lines = dest.read_text().splitlines()
    assert lines[0].startswith("# optbankrupt solve schema 1")
    rows = dict(csv.reader(lines[2:]))
    assert float(rows["x_bar"]) == pytest.approx(10.0651, rel=5e-4)


def test_missing_config(capsys):
    code, _, err = run(capsys, "solve", "--config", "/nonexistent.json")
    assert code == 1 and "cannot read" in err


def test_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--config", str(CONFIGS / "sweep_alpha.json"))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# optbankrupt sweep schema 1")
    rows = list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))
    assert len(rows) == 10
    xb = [float(r["x_bar"]) for r in rows]
    assert all(a < b for a, b in zip(xb, xb[1:]))


def test_sweep_json_and_precision(capsys):
    code, out, _ = run(capsys, "sweep", "--grid", "d=0.2:0.4:3", "--format", "json")
    data = json.loads(out)
    assert data["schema_version"] == 1 and len(data["rows"]) == 3
    assert all(len(repr(r["x_bar"]).replace(".", "").lstrip("0")) >= 10 for r in data["rows"])


def test_sweep_needs_grid(capsys):
    code, _, err = run(capsys, "sweep")
    assert code == 1 and "--grid" in err


def test_simulate_deterministic(capsys, tmp_path):
    args = ["simulate", "--param", "x0=25", "--n-paths", "2", "--horizon", "10",
            "--every", "100", "--seed", "5"]
    code, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args)
    assert code == 0 and a == b
    lines = a.splitlines()
    assert lines[0].startswith("# optbankrupt paths schema 1")
    assert lines[1] == "path,t,Z,X,c,l,pi,regime"


def test_simulate_summary(capsys, tmp_path):
    summary = tmp_path / "s.json"
    code, _, _ = run(capsys, "simulate", "--config", str(CONFIGS / "simulation.json"),
                     "--n-paths", "1", "--budget-paths", "2000", "--summary", str(summary))
    assert code == 0
    s = json.loads(summary.read_text())
    bc = s["budget_check"]
    assert abs(bc["estimate"]) <= 3 * bc["se"]
    assert s["tau"]["finite_fraction"] == 1.0


def test_simulate_bad_dt(capsys):
    code, _, err = run(capsys, "simulate", "--dt", "0")
    assert code == 1


def test_byte_stable_subprocess(tmp_path):
    cmd = [sys.executable, "-m", "optbankrupt", "sweep", "--grid", "w=1:2:3"]
    a = subprocess.run(cmd, capture_output=True, check=True).stdout
    b = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert a == b and a.startswith(b"# optbankrupt sweep schema 1")


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_shipped_configs_load(name):
    from optbankrupt import load_config
    load_config(CONFIGS / name)
