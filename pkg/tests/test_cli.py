import csv
import json
import os
import subprocess
import sys

import pytest

from cli_cases import CASES, write_inputs
from snowlab.cli import build_parser, run

SUBCOMMANDS = [
    "curve", "extend", "line-map", "lift-lr", "lift-c0", "discretize", "kuratowski", "round",
    "type", "cotype", "metric-type", "metric-cotype", "sigma", "profile", "conditions", "verdict",
    "theta", "scale-family", "verify-family", "partial-sums", "window", "brute", "search", "obstruction",
]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    write_inputs(tmp_path)
    monkeypatch.chdir(tmp_path)
    return tmp_path


def test_every_subcommand_has_a_case():
    assert sorted(CASES) == sorted(SUBCOMMANDS)


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_subcommand_runs_and_writes_manifest(name, workdir):
    out = workdir / f"{name}.out"
    assert run([name, *CASES[name], "--out", str(out)]) == 0
    assert out.read_text()
    manifest = json.loads((workdir / f"{name}.out.manifest.json").read_text())
    assert manifest["subcommand"] == name
    assert manifest["outputs"] == [str(out)]
    assert manifest["seed"] == 0 or "--seed" in CASES[name]
    for path in manifest["inputs"]:
        assert path in CASES[name]


@pytest.mark.parametrize("name", SUBCOMMANDS)
def test_help_names_the_construction(name, capsys):
    assert run([name, "--help"]) == 0
    assert "Construction:" in capsys.readouterr().out


def test_curve_example(workdir):
    assert run(["curve", "--r", "0.3", "--samples", "1000", "--out", "curve.csv"]) == 0
    rows = list(csv.reader(open("curve.csv")))
    assert rows[0] == ["t", "x", "y"] and len(rows) == 1001
    by_t = {float(r[0]): (float(r[1]), float(r[2])) for r in rows[1:]}
    h = (0.3 - 0.25) ** 0.5
    for t, xy in {0.0: (0, 0), 0.25: (0.3, 0), 0.5: (0.5, h), 0.75: (0.7, 0), 1.0: (1, 0)}.items():
        assert abs(by_t[t][0] - xy[0]) < 1e-12 and abs(by_t[t][1] - xy[1]) < 1e-12


def test_verdict_example(capsys):
    assert run(["verdict", "--r", "1", "--p", "1", "--s", "1", "--q", "2"]) == 0
    assert capsys.readouterr().out == "reducible: true\n"


def test_round_example(workdir):
    (workdir / "x.json").write_text(json.dumps({"x": [0.7], "indices": [2]}))
    assert run(["round", "--in", "x.json", "--out", "y.json"]) == 0
    assert json.loads((workdir / "y.json").read_text()) == [0.5]
    (workdir / "x2.json").write_text("[0.7]")
    assert run(["round", "--in", "x2.json", "--start", "2", "--out", "y2.json"]) == 0
    assert json.loads((workdir / "y2.json").read_text()) == [0.5]


def test_stdout_run_puts_manifest_on_stderr(capsys):
    assert run(["profile", "--space", "c0"]) == 0
    out, err = capsys.readouterr()
    assert out == "space,p_sup,q_inf\nc0,1,inf\n"
    assert json.loads(err)["subcommand"] == "profile"


def test_validation_errors_exit_2(workdir, capsys):
    assert run(["verdict", "--r", "2", "--p", "1", "--s", "1.5", "--q", "1"]) == 2
    assert "s <= q" in capsys.readouterr().err
    assert run(["curve", "--r", "0.6"]) == 2
    assert "(1/4, 1/2)" in capsys.readouterr().err
    assert run(["round", "--in", "missing.json"]) == 2
    assert run(["nosuch"]) == 2
    assert "usage" in capsys.readouterr().err


def test_config_resolution(workdir, capsys):
    (workdir / "c.cfg").write_text("# comment\nhorizon = 500\nplant=geometric:0.5\n")
    assert run(["partial-sums", "--config", "c.cfg"]) == 0
    out, err = capsys.readouterr()
    assert len(out.splitlines()) == 501
    assert json.loads(err)["config"]["horizon"] == 500
    assert run(["partial-sums", "--config", "c.cfg", "--horizon", "1000"]) == 0
    out, err = capsys.readouterr()
    assert len(out.splitlines()) == 1001
    assert json.loads(err)["config"]["horizon"] == 1000


def test_config_empty_file_gives_defaults(workdir, capsys):
    (workdir / "e.cfg").write_text("")
    assert run(["verdict", "--config", "e.cfg"]) == 0
    assert capsys.readouterr().out == "reducible: true\n"


def test_config_errors(workdir, capsys):
    (workdir / "bad.cfg").write_text("horizon=5\nbogus=1\n")
    assert run(["partial-sums", "--config", "bad.cfg"]) == 2
    err = capsys.readouterr().err
    assert "bogus" in err and "valid keys" in err and "horizon" in err
    (workdir / "mal.cfg").write_text("horizon=5\nhorizon 7\n")
    assert run(["partial-sums", "--config", "mal.cfg"]) == 2
    assert "mal.cfg:2" in capsys.readouterr().err


def test_csv_uses_round_trip_digits(capsys):
    assert run(["scale-family", "--horizon", "3", "--A", "3", "--p", "1", "--q", "3"]) == 0
    rows = capsys.readouterr().out.splitlines()
    assert rows[-1].split(",")[2] == "%.17g" % (3.0 * 2 ** (-2 / 3))


def test_console_script_exit_codes(tmp_path):
    env = dict(os.environ)
    ok = subprocess.run([sys.executable, "-m", "snowlab.cli", "verdict"], capture_output=True, text=True, env=env)
    assert ok.returncode == 0 and ok.stdout == "reducible: true\n"
    bad = subprocess.run([sys.executable, "-m", "snowlab.cli", "sigma", "--s", "0", "--m", "1"], capture_output=True, text=True, env=env)
    assert bad.returncode == 2 and "m must be >= 2" in bad.stderr


def test_parser_lists_all_subcommands():
    text = build_parser().format_help()
    for name in SUBCOMMANDS:
        assert name in text
