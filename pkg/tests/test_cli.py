"""Command-line front end: dispatch, persistence, exit codes."""
import csv
import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

from frobpade import cli
from frobpade.errors import NumericalError

FIG3 = """\
mu: {interval: ["-1", "0"]}
sigma: {interval: ["0", "3"]}
c: 1/3
precision_bits: 128
trajectory: {step: "0.02"}
grid: {re: ["-2", "4", 7], im: ["-1", "1", 3]}
"""

POLE = """\
mu: {interval: ["-1", "1"]}
sigma: {interval: ["2", "3"]}
index: {m: 2, n: 1}
target: {kind: pole, pole: "1.5"}
precision_bits: 128
"""

DIAG = """\
mu: {interval: ["-1", "1"]}
sigma: {interval: ["2", "3"]}
c: 1/2
precision_bits: 192
ray:
  ns: [6, 8, 10]
  test_points: ["-2+1j", "1.5j", "4", "-3", "2.5+1j"]
"""


def _write(tmp_path, text, name="run.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def _run(tmp_path, command, text, *extra):
    cfg = _write(tmp_path, text)
    out = tmp_path / "out"
    code = cli.run([command, "--config", cfg, "--out", str(out), *extra])
    dirs = sorted(out.glob(f"{command}-*")) if out.exists() else []
    return code, dirs


def _digest(d: Path):
    return {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in sorted(d.iterdir())}


def test_curve_command(tmp_path):
    code, dirs = _run(tmp_path, "curve", FIG3)
    assert code == 0 and len(dirs) == 1
    obj = json.loads((dirs[0] / "curve.json").read_text())
    assert abs(float(obj["b_sigma_c"]) - 2.43) < 1e-30
    manifest = json.loads((dirs[0] / "manifest.json").read_text())
    assert manifest["schema_version"] == 1 and manifest["command"] == "curve"
    assert set(manifest["files"]) == {"config.yaml", "curve.json"}
    assert (dirs[0] / "config.yaml").read_text().startswith("schema: 1")


def test_approximate_recovers_pole(tmp_path):
    code, dirs = _run(tmp_path, "approximate", POLE)
    assert code == 0
    obj = json.loads((dirs[0] / "approximant.json").read_text())
    q0, q1 = (float(v) for v in obj["q_coeffs"])
    # Q = q0 p0 + q1 p1 with p0 = 1, p1 = sqrt(2) x vanishes at x = 1.5
    assert abs(q0 + q1 * 2 ** 0.5 * 1.5) < 1e-15
    assert all(float(v) == 0 for v in obj["p_coeffs"][1:])


def test_zeros_command(tmp_path):
    code, dirs = _run(tmp_path, "zeros", POLE)
    rows = list(csv.DictReader((dirs[0] / "zeros.csv").open()))
    assert code == 0 and len(rows) == 1
    assert float(rows[0]["re"]) == pytest.approx(1.5, abs=1e-18)
    # 20 significant digits
    assert len(rows[0]["re"].split("e")[0].replace(".", "").lstrip("-")) == 20


def test_domains_and_trajectory(tmp_path):
    code, dirs = _run(tmp_path, "domains", FIG3)
    rows = list(csv.DictReader((dirs[0] / "domains.csv").open()))
    assert code == 0 and len(rows) == 21
    at = {(float(r["re"]), float(r["im"])): r["region"] for r in rows}
    assert at[(-2.0, 0.0)] == "ConvergencePlus"
    code, dirs = _run(tmp_path, "trajectory", FIG3)
    rows = list(csv.DictReader((dirs[0] / "trajectory.csv").open()))
    assert code == 0
    assert float(rows[0]["re"]) == pytest.approx(2.43)
    assert {r["branch"] for r in rows} == {"upper", "lower"}


def test_verify_is_byte_identical(tmp_path):
    code, dirs = _run(tmp_path, "verify", DIAG, "--suite", "szego")
    assert code == 0
    first = _digest(dirs[0])
    summary = json.loads((dirs[0] / "summary.json").read_text())
    assert summary["pass"] and set(summary["experiments"]) == {"szego"}
    code, dirs2 = _run(tmp_path, "verify", DIAG, "--suite", "szego")
    assert dirs2 == dirs and _digest(dirs2[0]) == first


def test_verify_rate_suite_passes(tmp_path):
    text = DIAG.replace('test_points: ["-2+1j", "1.5j", "4", "-3", "2.5+1j"]', 'test_points: ["-2+1j"]')
    code, dirs = _run(tmp_path, "verify", text, "--suite", "rate")
    assert code == 0
    assert json.loads((dirs[0] / "summary.json").read_text())["pass"]


def test_configuration_errors_exit_one(tmp_path, capsys):
    assert cli.run(["curve", "--config", _write(tmp_path, FIG3), "--bogus"]) == 1
    assert "usage" in capsys.readouterr().err
    assert cli.run(["nonsense", "--config", "x"]) == 1
    assert cli.run(["curve"]) == 1
    capsys.readouterr()
    code, _ = _run(tmp_path, "curve", FIG3.replace("c: 1/3", "c: 3/4"))
    assert code == 1
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "ConfigError" and "run.yaml:3:" in err["message"]
    code, _ = _run(tmp_path, "approximate", FIG3)
    assert code == 1


def test_numerical_failure_exit_two_and_no_partial_output(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise NumericalError("Newton stalled", residual=0.5)
    monkeypatch.setattr(cli, "solve_curve", boom)
    code, dirs = _run(tmp_path, "curve", FIG3)
    assert code == 2 and dirs == []
    err = json.loads(capsys.readouterr().err)
    assert err == {"error": "NumericalError", "message": "Newton stalled", "residual": 0.5}


def test_interrupted_write_leaves_nothing(tmp_path, monkeypatch):
    def fail(src, dst):
        raise OSError("disk full")
    monkeypatch.setattr(cli.os, "rename", fail)
    code, _ = _run(tmp_path, "curve", FIG3)
    assert code == 1
    assert list((tmp_path / "out").iterdir()) == []


def test_precision_flag_overrides(tmp_path):
    code, dirs = _run(tmp_path, "curve", FIG3, "--precision", "96")
    cfg = (dirs[0] / "config.yaml").read_text()
    assert code == 0 and "precision_bits: 96" in cfg


def test_module_entry_point(tmp_path):
    cfg = _write(tmp_path, FIG3)
    proc = subprocess.run([sys.executable, "-m", "frobpade", "curve", "--config", cfg,
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert Path(proc.stdout.strip()).name.startswith("curve-")
