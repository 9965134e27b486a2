import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from sqfn.cli import dispatch
from sqfn.io import load_field, save_field
from sqfn.field import ScalarField, make_grid


def test_gen_and_apply_T_on_constant(tmp_path):
    src = tmp_path / "c.sqfn"
    save_field(ScalarField.constant(make_grid(2, 64, 1.0), 3.0), src)
    out = tmp_path / "t.sqfn"
    assert dispatch(["apply", "--op", "T", "--in", str(src), "--out", str(out)]) == 0
    assert np.abs(load_field(out).values).max() < 1e-12


def test_gen_is_reproducible(tmp_path):
    a, b = tmp_path / "a.sqfn", tmp_path / "b.csv"
    args = ["gen", "--dim", "1", "--size", "128", "--gen", "random_bandlimited:K=8", "--seed", "7"]
    assert dispatch(args + ["--out", str(a)]) == 0
    assert dispatch(args + ["--out", str(b)]) == 0
    assert np.array_equal(load_field(a).values, load_field(b).values)


@pytest.mark.parametrize("op", ["S", "W", "Ttilde", "Stilde", "muomega", "sigma", "riesz",
                                "halflap", "sphmax", "hlmax"])
def test_apply_every_operator(tmp_path, op, capsys):
    src = tmp_path / "g.sqfn"
    assert dispatch(["gen", "--dim", "2", "--size", "64", "--gen", "gaussian:sigma=0.12",
                     "--out", str(src)]) == 0
    out = tmp_path / "o.sqfn"
    assert dispatch(["apply", "--op", op, "--in", str(src), "--out", str(out),
                     "--alpha", "0.5", "--tails"]) == 0
    assert load_field(out).grid == make_grid(2, 64, 1.0)
    assert "value=" in capsys.readouterr().out


def test_verify_isometry_example(tmp_path):
    r = tmp_path / "r.json"
    rc = dispatch(["--threads", "1", "verify", "--suite", "isometry", "--dim", "1", "--size", "4096",
                   "--box", "32", "--seed", "1", "--report", str(r), "--format", "json"])
    d = json.loads(r.read_text())
    assert rc == 0 and d["pass"]
    assert d["constants"]["spread_T"] <= 0.01
    assert d["constants"]["C1"] > 0


def test_sweep_example_ratio_column(tmp_path):
    r = tmp_path / "s.csv"
    rc = dispatch(["sweep", "--suite", "equivalence", "--p-list", "2", "--alpha", "none",
                   "--corpus-size", "3", "--report", str(r), "--format", "csv"])
    with open(r, newline="") as fh:
        vals = [float(row["ratio_T"]) for row in csv.DictReader(fh)]
    assert rc == 0
    assert all(abs(v / 0.5 - 1) < 0.03 for v in vals)


def test_failed_check_still_writes_report(tmp_path):
    r = tmp_path / "p.json"
    rc = dispatch(["verify", "--suite", "pointwise", "--dim", "1", "--size", "512",
                   "--report", str(r)])
    assert r.exists()
    d = json.loads(r.read_text())
    assert rc == (0 if d["pass"] else 1)


def test_sequential_reports_are_byte_identical(tmp_path):
    outs = []
    for k in range(2):
        r = tmp_path / f"m{k}.json"
        assert dispatch(["--threads", "1", "verify", "--suite", "maximal", "--size", "128",
                         "--report", str(r)]) == 0
        outs.append(r.read_bytes())
    assert outs[0] == outs[1]


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    r1, r2 = tmp_path / "a.json", tmp_path / "b.json"
    cfg.write_text(f"# defaults\nsuite = representation\nsize = 128\nreport = {r1}\n")
    assert dispatch(["verify", "--config", str(cfg)]) == 0
    assert json.loads(r1.read_text())["params"]["N"] == 128
    assert dispatch(["verify", "--config", str(cfg), "--size", "64", "--report", str(r2)]) in (0, 1)
    assert json.loads(r2.read_text())["params"]["N"] == 64


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["verify", "--suite", "nope", "--report", "x.json"],
    ["verify", "--suite", "maximal"],
    ["apply", "--op", "T", "--in", "/nonexistent/f.sqfn", "--out", "o.sqfn"],
    ["sweep", "--p-list", "0.5", "--report", "x.json"],
    ["sweep", "--alpha", "-3", "--p-list", "2", "--dim", "2", "--report", "x.json"],
    ["gen", "--size", "100", "--out", "x.sqfn"],
    ["--threads", "0", "gen", "--out", "x.sqfn"],
    ["verify", "--unknown-flag"],
])
def test_usage_errors_exit_2(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert dispatch(argv) == 2


def test_bad_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert dispatch(["verify", "--config", str(cfg), "--suite", "maximal", "--report", "x"]) == 2
    cfg.write_text("no equals sign\n")
    assert dispatch(["verify", "--config", str(cfg), "--suite", "maximal", "--report", "x"]) == 2


def test_console_entry_point_usage_on_stderr():
    p = subprocess.run([sys.executable, "-m", "sqfn.cli", "frobnicate"], capture_output=True, text=True)
    assert p.returncode == 2
    assert "usage" in p.stderr
