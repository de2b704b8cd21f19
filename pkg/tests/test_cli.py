import csv
import json
import subprocess
import sys

import pytest

from vacuumlab.cli import RunConfig, main, read_config_file


def _run(tmp_path, *args, name="out"):
    out = tmp_path / name
    code = main([*args, "--output_dir", str(out)])
    return code, out


def test_check_n_exit_codes(tmp_path):
    code, out = _run(tmp_path, "check-n", "--N", "109")
    assert code == 0
    verdict = json.loads((out / "verdict.json").read_text())
    assert verdict["paper_sufficient"] and verdict["raw_inequality"]
    code, out = _run(tmp_path, "check-n", "--N", "12", name="n12")
    assert code == 1


def test_usage_errors(tmp_path, capsys):
    assert main(["bogus"]) == 2
    code, _ = _run(tmp_path, "spectrum", "--N", "6")
    assert code == 2
    code, _ = _run(tmp_path, "spectrum", "--modes", "many")
    assert code == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("N 7\n")
    assert main(["spectrum", "--config", str(bad)]) == 2


def test_spectrum_outputs(tmp_path):
    code, out = _run(tmp_path, "spectrum", "--n_modes", "4")
    assert code == 0
    rows = list(csv.DictReader((out / "spectrum.csv").open()))
    assert [int(r["n"]) for r in rows] == [0, 1, 2, 3]
    assert float(rows[1]["lambda"]) == pytest.approx(6.0, rel=1e-6)
    assert float(rows[1]["C0"]) / float(rows[1]["C1"]) == pytest.approx(-5 / 7, rel=1e-6)
    assert (out / "mode_2.csv").exists()
    report = json.loads((out / "report.json").read_text())
    assert report["max_relative_error"] < 1e-6
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["subcommand"] == "spectrum" and manifest["config"]["n_modes"] == 4


def test_spectrum_is_deterministic(tmp_path):
    _, a = _run(tmp_path, "spectrum", "--n_modes", "3", name="a")
    _, b = _run(tmp_path, "spectrum", "--n_modes", "3", name="b")
    for f in ("spectrum.csv", "mode_1.csv", "report.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_config_round_trip(tmp_path):
    _, out = _run(tmp_path, "check-n", "--N", "109", "--tol", "1e-7")
    values = read_config_file(out / "config.txt")
    cfg = RunConfig(**values)
    assert cfg.N == 109 and cfg.tol == 1e-7
    code = main(["check-n", "--config", str(out / "config.txt"), "--output_dir", str(tmp_path / "again")])
    assert code == 0
    strip = lambda p: [ln for ln in p.read_text().splitlines() if not ln.startswith("output_dir=")]
    assert strip(tmp_path / "again" / "config.txt") == strip(out / "config.txt")


def test_output_dir_precedence(tmp_path, monkeypatch):
    env = tmp_path / "env"
    monkeypatch.setenv("VACUUMLAB_OUTPUT_DIR", str(env))
    cfgfile = tmp_path / "c.cfg"
    cfgfile.write_text(f"N = 109\noutput_dir = {tmp_path / 'cfg'}\n")
    assert main(["check-n", "--config", str(cfgfile)]) == 0
    assert (env / "verdict.json").exists()
    flag = tmp_path / "flag"
    assert main(["check-n", "--config", str(cfgfile), "--output_dir", str(flag)]) == 0
    assert (flag / "verdict.json").exists()
    assert not (tmp_path / "cfg" / "verdict.json").exists()


def test_equilibrium_scan(tmp_path):
    code, out = _run(tmp_path, "equilibrium", "--gammas", "1.2,1.9")
    assert code == 0
    lines = (out / "scan.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "gamma,finite,r_plus"
    assert lines[1] == "1.2,infinite,—"
    g, kind, r = lines[2].split(",")
    assert float(g) == 1.9 and kind == "finite" and float(r) > 0


def test_iterate_trace(tmp_path):
    code, out = _run(tmp_path, "iterate", "--seed_kind", "manufactured", "--modes", "16", "--steps", "32")
    assert code == 0
    trace = json.loads((out / "trace.json").read_text())
    assert trace[-1]["residual"] < 1e-6
    assert all(s["wall_ms"] is None for s in trace)


def test_console_script_entry():
    res = subprocess.run([sys.executable, "-m", "vacuumlab.cli", "frobnicate"], capture_output=True)
    assert res.returncode == 2


def test_verify_reports_envelopes(tmp_path):
    code, out = _run(tmp_path, "verify", "--trials", "3")
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"]
    assert [e["envelope_ok"] for e in report["envelopes"]] == [False, False]
