import json
import subprocess
import sys

import numpy as np
import pytest

from nufourier.cli import run, stream_seed
from nufourier.geometry import box
from nufourier.measures import frame_bound_A


@pytest.fixture(autouse=True)
def in_tmp(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def test_bounds_matches_library(capsys):
    assert run(["bounds", "--body", "box:0.5:1", "--delta", "0.125"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema_version"] == "1"
    assert doc["A"] == frame_bound_A(box(0.5), 0.125)
    man = read_json("nufourier-bounds.manifest.json")
    assert man["params"]["delta"] == 0.125 and man["schema_version"] == "1"


def test_gen_grid_rows(capsys):
    assert run(["gen", "--kind", "grid", "--h", "1", "--dim", "1", "--extent", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "x1" and len(lines[1:]) == 5


def _pipeline():
    assert run(["gen", "--kind", "jittered", "--h", "0.4", "--tau", "0.2", "--dim", "2",
                "--extent", "10", "--seed", "5", "--out", "pts.csv"]) == 0
    assert run(["weights", "--points", "pts.csv", "--body", "box:0.5:2", "--K", "4",
                "--resolution", "300", "--out", "w.csv"]) == 0
    assert run(["measure", "--weights", "w.csv", "--space", "haar:2:2", "--K", "3",
                "--out", "m.json"]) == 0


def test_measure_rerun_byte_identical(in_tmp):
    _pipeline()
    first = (in_tmp / "m.json").read_bytes()
    assert read_json("m.json")["report"]["V"] > 0
    assert run(["rerun", "m.json.manifest.json"]) == 0
    assert (in_tmp / "m.json").read_bytes() == first


def test_manifests_rerun_with_any_thread_count(in_tmp):
    _pipeline()
    outputs = ["pts.csv", "pts.csv.json", "w.csv", "w.csv.json", "m.json"]
    before = {p: (in_tmp / p).read_bytes() for p in outputs}
    for manifest in ["pts.csv.manifest.json", "w.csv.manifest.json", "m.json.manifest.json"]:
        text = (in_tmp / manifest).read_bytes()
        for threads in ("1", "3"):
            assert run(["rerun", manifest, "--threads", threads]) == 0
            assert (in_tmp / manifest).read_bytes() == text
    assert {p: (in_tmp / p).read_bytes() for p in outputs} == before


def test_seed_streams_are_named():
    assert stream_seed(3, "gen") == stream_seed(3, "gen")
    assert stream_seed(3, "gen") != stream_seed(3, "weights")
    assert stream_seed(3, "gen") != stream_seed(4, "gen")


def test_reconstruct_pipeline(in_tmp):
    assert run(["gen", "--kind", "jittered", "--h", "0.45", "--tau", "0.2", "--extent", "140",
                "--seed", "7", "--out", "s.csv"]) == 0
    assert run(["weights", "--points", "s.csv", "--body", "box:1:1", "--K", "128",
                "--out", "w.csv"]) == 0
    rng = np.random.default_rng(0)
    f = rng.standard_normal(25) + 1j * rng.standard_normal(25)
    np.savetxt("f.csv", np.c_[f.real, f.imag], delimiter=",", header="re,im", comments="")
    assert run(["sample", "--coeffs", "f.csv", "--ambient", "legendre:24", "--weights", "w.csv",
                "--out", "g.csv"]) == 0
    assert run(["reconstruct", "--samples", "g.csv", "--weights", "w.csv", "--space",
                "legendre:8", "--out", "c.csv", "--report", "r.json", "--truth", "f.csv",
                "--ambient", "legendre:24"]) == 0
    rep = read_json("r.json")
    assert rep["error_report"]["bound_satisfied"]
    assert len(np.loadtxt("c.csv", delimiter=",", skiprows=1)) == 9


def test_concentration(capsys):
    assert run(["concentration", "--n", "8", "--eps", "0.25"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["concentration"]["coefficients"]) == 9


def test_sweep(in_tmp):
    cfg = {"family": "legendre", "params": [4, 8, 16], "set": {"kind": "grid", "h": 0.5},
           "theta": 0.1, "K_grid": {"start": 0.25, "stop": 2.0, "per_octave": 8}}
    (in_tmp / "cfg.json").write_text(json.dumps(cfg))
    assert run(["sweep", "--config", "cfg.json", "--out", "sw.csv"]) == 0
    assert read_json("sw.csv.json")["summary"]["gamma"] is not None
    assert len((in_tmp / "sw.csv").read_text().splitlines()) == 4


@pytest.mark.parametrize("suite", ["parseval", "balayage", "transference", "critical-rate"])
def test_check_suites(suite, in_tmp):
    assert run(["check", "--suite", suite, "--out", "c.json"]) == 0
    doc = read_json("c.json")
    assert doc["passed"] and doc["suite"] == suite


def test_argument_error_exit_code(capsys):
    assert run(["bounds", "--body", "box:0.5:1"]) == 2
    assert run(["nosuchcommand"]) == 2
    capsys.readouterr()


def test_computation_error_exit_code(capsys):
    assert run(["measure", "--weights", "missing.csv", "--space", "haar:2", "--K", "1"]) == 1
    assert "error" in capsys.readouterr().err
    assert run(["bounds", "--body", "box:0.5:1", "--delta", "0.3", "--eps", "1"]) == 1


def test_module_entry_point(in_tmp):
    out = subprocess.run([sys.executable, "-m", "nufourier", "bounds", "--body", "box:0.5:1",
                          "--delta", "0.25"], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["W_bound"] == pytest.approx(np.exp(np.pi))
    bad = subprocess.run([sys.executable, "-m", "nufourier", "gen"], capture_output=True)
    assert bad.returncode == 2
