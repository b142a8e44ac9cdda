import json
import subprocess
import sys

import numpy as np
import pytest
import yaml

from poreswell import config as cfgmod
from poreswell.cli import main, parse_values


def _small_config(tmp_path, name="default", **solver):
    cfg = cfgmod.preset(name)
    cfg["solver"].update({"N": 16, "steps": 100, **solver})
    path = tmp_path / f"{name}.yaml"
    cfgmod.dump(cfg, path)
    return path


def _csv(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)


def test_run_equilibrium_gives_constant_columns(tmp_path):
    out = tmp_path / "eq"
    assert main(["run", "--config", str(_small_config(tmp_path, "equilibrium")), "--out", str(out)]) == 0
    ts = _csv(out / "timeseries.csv")
    # s, s_t, u_at_a, u_at_front
    for col in (1, 2, 3, 4):
        np.testing.assert_allclose(ts[:, col], ts[0, col], atol=1e-12)
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and report["steps"] == 100


def test_invalid_config_exits_2(tmp_path, capsys):
    cfg = cfgmod.preset("default")
    cfg["initial"]["u0"] = 0.1
    path = tmp_path / "bad.yaml"
    cfgmod.dump(cfg, path)
    assert main(["run", "--config", str(path)]) == 2
    assert "ViolatesA5" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_verify_accepts_clean_and_rejects_tampered_runs(tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--config", str(_small_config(tmp_path)), "--out", str(out)]) == 0
    assert main(["verify", "--out", str(out)]) == 0

    fields = out / "fields.csv"
    lines = fields.read_text().splitlines()
    row = lines[30].split(",")
    row[5] = "-1"
    lines[30] = ",".join(row)
    fields.write_text("\n".join(lines) + "\n")
    assert main(["verify", "--run-dir", str(out)]) == 4

    fields.write_text("\n".join(lines[:-10]) + "\n")
    assert main(["verify", "--out", str(out)]) == 5
    assert main(["verify", "--out", str(tmp_path / "nowhere")]) == 5


def test_artifacts_are_byte_identical_across_runs(tmp_path):
    cfg = str(_small_config(tmp_path))
    for name in ("a", "b"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    for f in ("timeseries.csv", "fields.csv", "report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_gamma_mode_records_fixed_point(tmp_path):
    out = tmp_path / "g"
    assert main(["run", "--config", str(_small_config(tmp_path)), "--out", str(out),
                 "--mode", "gamma"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mode"] == "gamma"
    assert report["fixed_point_distances"][-1] < 1e-8
    assert main(["verify", "--out", str(out)]) == 0


def test_converge_levels(tmp_path, capsys):
    cfg = str(_small_config(tmp_path, N=8, steps=10))
    with pytest.raises(SystemExit) as exc:
        main(["converge", "--config", cfg, "--levels", "2"])
    assert exc.value.code == 2
    out = tmp_path / "conv"
    assert main(["converge", "--config", str(_small_config(tmp_path, "equilibrium", N=8, steps=10)),
                 "--levels", "3", "--out", str(out)]) == 0
    text = (out / "convergence.csv").read_text()
    assert text.startswith("kind,N,steps,diff,order") and "exact" in text


def test_sweep_keeps_order_and_reports_partial_failure(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("PW_THREADS", "2")
    cfg = str(_small_config(tmp_path))
    out = tmp_path / "sw"
    assert main(["sweep", "--config", cfg, "--param", "a0", "--values", "0.5,1.0,2.0",
                 "--out", str(out)]) == 0
    merged = json.loads((out / "sweep.json").read_text())
    assert [m["value"] for m in merged] == [0.5, 1.0, 2.0]
    finals = [m["final"]["s"] for m in merged]
    assert finals == sorted(finals)
    # a negative rate constant violates the assumptions, the others still run
    assert main(["sweep", "--config", cfg, "--param", "physical.a0", "--values", "1.0,-1.0",
                 "--out", str(tmp_path / "sw2")]) == 2
    merged = json.loads((tmp_path / "sw2" / "sweep.json").read_text())
    assert [m["exit_code"] for m in merged] == [0, 2]


def test_sweep_rejects_empty_values(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--config", str(_small_config(tmp_path)), "--param", "a0", "--values", ""])
    assert exc.value.code == 2
    assert parse_values("1, 2.5,abc") == [1, 2.5, "abc"]


def test_config_roundtrip(tmp_path):
    path = _small_config(tmp_path)
    loaded = yaml.safe_load(path.read_text())
    assert cfgmod.build_run_config(loaded).grid.N == 16


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "poreswell", "--help"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == 0
    for cmd in ("run", "verify", "converge", "sweep"):
        assert cmd in proc.stdout
