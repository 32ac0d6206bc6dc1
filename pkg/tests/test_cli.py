import json
import subprocess
import sys

import pytest

from qaga.cli import main
from qaga.ising import IsingModel, ProblemSpec, random_model
from qaga.serialization import load_model, save_model

SMALL = ["--reads", "20", "--gauges", "2", "--sweeps", "20"]


@pytest.fixture
def fixture_file(tmp_path, fixture_model):
    path = tmp_path / "fixture.json"
    save_model(fixture_model, path)
    return path


def test_generate_json(tmp_path):
    out = tmp_path / "m.json"
    assert main(["generate", "--n", "6", "--sparsity", "0.5", "--seed", "3", "--out", str(out)]) == 0
    assert load_model(out) == random_model(ProblemSpec(6, 0.5, "normal", 3))


def test_generate_csv(tmp_path):
    out = tmp_path / "m.csv"
    assert main(["generate", "--n", "4", "--format", "csv", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "i,j,value"
    m = random_model(ProblemSpec(4, 1.0, "normal", 0))
    assert len(lines) == 1 + 4 + len(m.J)


def test_solve_exact_fixture(fixture_file, tmp_path, capsys):
    out = tmp_path / "sol.json"
    assert main(["solve", "--model", str(fixture_file), "--method", "exact", "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["energy"] == -3.0
    assert report["solution"] == {"1": 1, "2": -1}
    assert "energy: -3.0" in capsys.readouterr().out


@pytest.mark.parametrize("method", ["qa", "mqc", "qaga", "sa", "sqc-polish"])
def test_solve_methods(fixture_file, method, capsys):
    assert main(["solve", "--model", str(fixture_file), "--method", method, *SMALL]) == 0
    assert "energy: -3.0" in capsys.readouterr().out


def test_solve_qaga_trace(capsys):
    assert main(["solve", "--n", "10", "--sparsity", "0.5", "--theta", "0.2", *SMALL]) == 0
    out = capsys.readouterr().out
    assert "stage 0: vars=10" in out and "fallback=" in out


def test_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"h": {"1": 1.0,\n "J": }')
    assert main(["solve", "--model", str(bad), "--method", "exact"]) == 2
    err = capsys.readouterr().err
    assert "line 2" in err and "column" in err


def test_invalid_model_content(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"h": {"1": "x"}, "J": {}}')
    assert main(["solve", "--model", str(bad), "--method", "exact"]) == 2


def test_missing_model_file(tmp_path):
    assert main(["solve", "--model", str(tmp_path / "nope.json")]) == 2


def test_theta_out_of_range(capsys):
    assert main(["solve", "--n", "5", "--theta", "0.6"]) == 2
    assert "invalid configuration" in capsys.readouterr().err


def test_exact_too_large(capsys):
    assert main(["solve", "--n", "25", "--method", "exact"]) == 2
    assert "25" in capsys.readouterr().err


def test_bad_sparsity_list():
    with pytest.raises(SystemExit) as exc:
        main(["expa", "--sparsities", "0.5,abc"])
    assert exc.value.code == 2


def test_expa_invalid_config():
    assert main(["expa", "--sparsities", "1.5", "--problems", "1"]) == 2


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_expa_byte_identical(tmp_path, fmt):
    args = ["expa", "--problems", "2", "--n", "6", "--sparsities", "0.5,1.0", "--format", fmt, *SMALL]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted([f"records.{fmt}", "summary.json", "winloss.csv"])
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_expb_outputs(tmp_path):
    args = ["expb", "--problems", "2", "--n", "6", "--thetas", "0.25,0", "--sparsities", "0.5",
            "--out", str(tmp_path), "--timings", *SMALL]
    assert main(args) == 0
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["thetas"] == [0.25, 0.0]
    assert len(summary["mean_stages"]) == 2
    records = json.loads((tmp_path / "records.json").read_text())
    assert all("wall_time" in r for r in records)


def test_expa_failures_exit_1(tmp_path, capsys):
    args = ["expa", "--problems", "1", "--n", "4", "--sparsities", "0.5", "--distributions", "normal",
            "--sampler", "remote", "--endpoint", "http://127.0.0.1:9/", "--timeout", "1",
            "--out", str(tmp_path), *SMALL]
    assert main(args) == 1
    assert "1 of 1 problems failed" in capsys.readouterr().err
    assert json.loads((tmp_path / "records.json").read_text())[0]["error"]


def test_module_entry_point(fixture_file):
    proc = subprocess.run([sys.executable, "-m", "qaga", "solve", "--model", str(fixture_file),
                           "--method", "exact"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "energy: -3.0" in proc.stdout
