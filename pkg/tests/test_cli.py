import json
import math
import subprocess
import sys

import pytest

from adsland.checks import Check
from adsland.cli import main
from adsland.report import RunReport, emit_report, report_dict
from adsland.scenarios import build_config, registered_checks, run

FAST = {}


def write_cfg(tmp_path, name="cfg.json", **data):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def strip(d):
    d = dict(d)
    d.pop("wall_time")
    return d


def test_duality_report(tmp_path, capsys):
    out = tmp_path / "out"
    cfg = write_cfg(tmp_path, scenario="duality", K=-2, **FAST)
    assert main(["duality", "--config", cfg, "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["schema"] == 1 and rep["scenario"] == "duality" and rep["passed"]
    names = [c["name"] for c in rep["checks"]]
    assert names == registered_checks(build_config({"scenario": "duality"}))
    for c in rep["checks"]:
        assert {"name", "value", "tol", "pass"} <= set(c)
    assert rep["results"]["K_star"] == pytest.approx(-2.0)
    assert "PASS dual_involution" in capsys.readouterr().out


def test_determinism(tmp_path):
    cfg = write_cfg(tmp_path, scenario="landslide", **FAST)
    for d in ("a", "b"):
        assert main(["landslide", "--config", cfg, "--out", str(tmp_path / d)]) == 0
    a = json.loads((tmp_path / "a" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "report.json").read_text())
    assert strip(a) == strip(b)
    for art in a["artifacts"]:
        assert (tmp_path / "a" / art).read_bytes() == (tmp_path / "b" / art).read_bytes()


def test_foliation_flow_time(tmp_path):
    cfg = write_cfg(tmp_path, scenario="foliation", K_list=[-4, -4 / 3], t=math.pi / 6, **FAST)
    assert main(["foliation", "--config", cfg, "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert "flow_time_expected" in [c["name"] for c in rep["checks"]]


@pytest.mark.parametrize("scenario", ["models", "ksurface"])
def test_scenarios_pass(tmp_path, scenario):
    cfg = write_cfg(tmp_path, scenario=scenario, **FAST)
    assert main([scenario, "--config", cfg, "--out", str(tmp_path / "o")]) == 0


def test_harmonic_fuchsian(tmp_path):
    code = main(["harmonic", "--fixture", "fuchsian-cone-disk", "--out", str(tmp_path / "o"),
                 "--config", write_cfg(tmp_path, scenario="harmonic", mesh_n=16)])
    assert code == 0


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o")
    cfg = write_cfg(tmp_path, scenario="duality", **FAST)
    assert main(["duality", "--config", cfg, "--curvature", "-0.5", "--out", out]) == 2
    assert main(["duality", "--config", cfg, "--fixture", "nope", "--out", out]) == 2
    assert main(["duality", "--config", cfg, "--tol", "nope=1", "--out", out]) == 2
    assert main(["duality", "--config", cfg, "--tol", "bad", "--out", out]) == 2
    assert main(["duality", "--config", str(tmp_path / "missing.json"), "--out", out]) == 2
    assert main(["duality", "--config", write_cfg(tmp_path, "bogus.json", scenario="duality", bogus=1)]) == 2
    assert main(["duality", "--config", cfg, "--tol", "dual_involution=-1", "--out", out]) == 1
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["duality", "--config", cfg, "--out", str(blocker)]) == 3
    err = capsys.readouterr().err
    assert "config error" in err and "check failure" in err and "internal error" in err


def test_formats_and_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("ADSLAND_THREADS", "3")
    cfg = write_cfg(tmp_path, scenario="duality", **FAST)
    out = tmp_path / "o"
    assert main(["duality", "--config", cfg, "--out", str(out), "--format", "json",
                 "--format", "csv", "--format", "text"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["threads"] == 3 and rep["config"]["threads"] == 3
    rows = (out / "report.csv").read_text().splitlines()
    assert rows[0] == "name,value,op,tol,pass" and len(rows) == 1 + len(rep["checks"])
    assert (out / "report.txt").read_text().endswith("all checks passed\n")
    monkeypatch.setenv("ADSLAND_THREADS", "x")
    assert main(["duality", "--config", cfg, "--out", str(out)]) == 2


def test_empty_report(tmp_path):
    rep = RunReport("models", {"scenario": "models"})
    assert rep.passed
    emit_report(rep, tmp_path, ("json", "csv", "text"))
    d = json.loads((tmp_path / "report.json").read_text())
    assert d["checks"] == [] and d["passed"] is True and d["schema"] == 1


def test_report_values():
    rep = RunReport("x", {"n": 3}, [Check("a", float("nan"), 1.0), Check("b", 2, 1, ">=")])
    d = report_dict(rep)
    assert d["checks"][0]["pass"] is False and d["checks"][0]["value"] == "nan"
    assert d["checks"][1]["pass"] is True and d["config"]["n"] == 3
    assert not rep.passed


def test_run_registers_every_check():
    cfg = build_config({"scenario": "landslide", "alpha": 0.0, **FAST})
    rep = run(cfg)
    assert rep.check_names() == registered_checks(cfg)
    assert "landslide_inverse" not in rep.check_names()


def test_console_entry(tmp_path):
    cfg = write_cfg(tmp_path, scenario="duality", **FAST)
    r = subprocess.run([sys.executable, "-m", "adsland.cli", "duality", "--config", cfg,
                        "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    r = subprocess.run([sys.executable, "-m", "adsland.cli", "nope"], capture_output=True, text=True)
    assert r.returncode == 2


@pytest.mark.slow
def test_verify_scenario(tmp_path):
    assert main(["verify", "--out", str(tmp_path / "o")]) == 0
    rep = json.loads((tmp_path / "o" / "report.json").read_text())
    assert rep["passed"] and len(rep["checks"]) == len(registered_checks(build_config({"scenario": "verify"})))
