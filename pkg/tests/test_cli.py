import json
import math
import subprocess
import sys

import numpy as np
import pytest

from transdyn.cli import run, semiconj_check
from transdyn.grid import read_ppm


def _run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = run([*argv, "--out", str(out)])
    return code, out


def test_empty_argv_is_usage_error(capsys):
    assert run([]) == 1
    assert "usage" in capsys.readouterr().err


def test_bad_flag_names_flag(tmp_path, capsys):
    code, _ = _run(tmp_path, "render", "--res", "banana")
    assert code == 1
    assert "--res" in capsys.readouterr().err


def test_bad_spec_token(tmp_path):
    assert _run(tmp_path, "ladder", "--spec", "quadexp:lambda=-1")[0] == 1


def test_domain_error_exit_2(tmp_path, capsys):
    code, _ = _run(tmp_path, "ladder", "--spec", "quadexp:lambda=0.5", "--R", "0.1")
    assert code == 2
    assert "LadderBaseInvalid" in capsys.readouterr().err


def test_module_rejection_is_usage_error(tmp_path):
    assert _run(tmp_path, "hair", "--a", "-0.5")[0] == 1


def test_semiconj_check_values():
    rep = semiconj_check(-1.0, 100)
    assert rep["max_residual"] < 1e-12
    assert abs(rep["g_prime_0"] - math.exp(-1)) < 1e-15 and rep["attracting"]
    # the identity at z = 0 is exact
    assert abs(math.exp(-(0 + 1 + math.exp(0))) - math.exp(-1) * 1 * math.exp(-1)) == 0


def test_semiconj_command(tmp_path):
    code, out = _run(tmp_path, "semiconj-check", "--a", "-1")
    assert code == 0
    rec = json.loads((out / "semiconj-check.jsonl").read_text().splitlines()[0])
    assert rec["max_residual"] < 1e-12


def test_render_artifacts_and_manifest(tmp_path):
    code, out = _run(tmp_path, "render", "--spec", "quadexp:lambda=1.1", "--res", "80x67", "--budget", "60")
    assert code == 0
    img = read_ppm(out / "render.ppm")
    assert img.shape == (67, 80, 3)
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "render"
    assert man["config"]["window"] == "-0.35,1.2:2.23,-1.2" and man["config"]["budget"] == 60
    assert man["config"]["spec"] == "quadexp:lambda=1.1" and man["config"]["res"] == "80x67"
    assert set(man["artifacts"]) >= {"render.ppm", "render.jsonl"}
    assert "tolerances" in man and "numpy" in man["versions"]


def _digests(out):
    return json.loads((out / "manifest.json").read_text())["artifacts"]


@pytest.mark.parametrize(
    "argv",
    [
        ("render", "--spec", "quadexp:lambda=1.1", "--res", "64x64", "--budget", "60"),
        ("classify", "--spec", "expaffine:a=-2", "--n", "40", "--seed", "3"),
        ("witness", "--res", "128x48"),
    ],
    ids=lambda a: a[0],
)
def test_byte_identical_reruns(tmp_path, argv):
    _, a = _run(tmp_path, *argv, "--workers", "1", name="a")
    _, b = _run(tmp_path, *argv, "--workers", "3", name="b")
    _, c = _run(tmp_path, *argv, "--workers", "1", name="c")
    assert _digests(a) == _digests(b) == _digests(c)
    for name in _digests(a):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# ladder run\ncommand=ladder\nspec=expaffine:a=0\nR=2.0\ndepth=3\n")
    code, out = _run(tmp_path, "--config", str(cfg), name="cfg")
    assert code == 0
    recs = [json.loads(l) for l in (out / "ladder.jsonl").read_text().splitlines()]
    assert len(recs) == 3 and abs(recs[0]["value"] - 2.0) < 1e-12
    # a flag on the command line wins over the file
    code, out = _run(tmp_path, "ladder", "--config", str(cfg), "--R", "3.0", name="cfg2")
    recs = [json.loads(l) for l in (out / "ladder.jsonl").read_text().splitlines()]
    assert code == 0 and abs(recs[0]["value"] - 3.0) < 1e-12


def test_persisted_config_reruns_identically(tmp_path):
    _, a = _run(tmp_path, "attractors", "--spec", "quadexp:lambda=1.1", name="a")
    conf = json.loads((a / "manifest.json").read_text())["config"]
    lines = [f"{k}={v}" for k, v in conf.items() if v is not None and k not in ("out", "config")]
    cfg = tmp_path / "again.cfg"
    cfg.write_text("\n".join(lines) + "\n")
    _, b = _run(tmp_path, "--config", str(cfg), name="b")
    assert _digests(a) == _digests(b)


def test_hair_addresses(tmp_path):
    code, out = _run(tmp_path, "hair", "--address", "|0", "--address", "0,1")
    recs = [json.loads(l) for l in (out / "hair.jsonl").read_text().splitlines()]
    assert code == 0 and [r["address"] for r in recs] == ["|0", "|0,1"]
    assert recs[0]["class"]["label"] == "bounded" and recs[0]["meandering"] is True


def test_console_script(tmp_path):
    p = subprocess.run(
        [sys.executable, "-m", "transdyn.cli", "attractors", "--spec", "expaffine:a=-2", "--out", str(tmp_path / "x")],
        capture_output=True,
        text=True,
    )
    assert p.returncode == 0
    recs = [json.loads(l) for l in (tmp_path / "x" / "attractors.jsonl").read_text().splitlines()]
    assert any(r["kind"] == "attracting" and abs(r["cycle"][0][0] + 1.8414056604369606) < 1e-9 for r in recs)
