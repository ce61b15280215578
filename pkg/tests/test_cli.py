import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from panelbreak.breaktest import run_test
from panelbreak.cli import main
from panelbreak.montecarlo import read_table
from panelbreak.rolling import read_results
from panelbreak.simulate import DgpSpec, dgp_to_config, generate

DATA = Path(__file__).parent / "data"


def test_sim_then_test(tmp_path, capsys):
    sim = tmp_path / "panel.csv"
    assert main(["sim", "--dgp", "ar1", "--N", "4", "--T", "60", "--seed", "5", "--out", str(sim)]) == 0
    lines = sim.read_text().splitlines()
    assert lines[0] == "x1,x2,x3,x4" and len(lines) == 61
    expected = generate(DgpSpec("AR1", 60, 4, seed=5)).values
    np.testing.assert_array_equal(np.loadtxt(sim, delimiter=",", skiprows=1), expected)

    assert main(["test", "--input", str(sim), "--epsilon", "0.1"]) == 0
    out = json.loads(capsys.readouterr().out)
    direct = run_test(expected, epsilon=0.1)
    assert out["statistic"] == direct.statistic and out["n_len"] == 4 and out["t_len"] == 60
    assert set(out["reject"]) == {"0.1", "0.05", "0.01"}


def test_sim_config(tmp_path):
    cfg = tmp_path / "dgp.txt"
    cfg.write_text(dgp_to_config(DgpSpec("LB", 30, 2, big_delta=1.0, seed=3)))
    out = tmp_path / "x.csv"
    assert main(["sim", "--config", str(cfg), "--N", "3", "--out", str(out)]) == 0
    np.testing.assert_array_equal(np.loadtxt(out, delimiter=",", skiprows=1),
                                  generate(DgpSpec("LB", 30, 3, big_delta=1.0, seed=3)).values)


def test_test_csv_format_and_window(tmp_path, capsys):
    data = DATA / "monthly_yields.csv"
    assert main(["test", "--input", str(data), "--diff", "--window", "24", "--format", "csv"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header.startswith("statistic,p_value,epsilon")
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["t_len"] == "24"


def test_roll_golden(tmp_path):
    out = tmp_path / "roll.csv"
    code = main(["roll", "--input", str(DATA / "monthly_yields.csv"), "--window", "24",
                 "--monthly-last", "--diff", "--out", str(out)])
    assert code == 0
    assert out.read_text() == (DATA / "rolling_golden.csv").read_text()
    assert len(read_results(out.read_text())) == 16


def test_mc_markdown_and_csv(tmp_path, capsys):
    assert main(["mc", "--dgp", "iid", "--N", "3", "--T", "40", "--reps", "4", "--format", "markdown"]) == 0
    md = capsys.readouterr().out
    assert md.splitlines()[3].startswith("| N | T | 10% | 5% | 1% |")
    out = tmp_path / "mc.csv"
    assert main(["mc", "--dgp", "MB", "--T", "40", "--N", "3", "--reps", "2", "--grid", "delta=0:1:0.5",
                 "--epsilon", "0.05", "--out", str(out)]) == 0
    res = read_table(out.read_text())
    assert [r.sweep_value for r in res] == [0.0, 0.5, 1.0] and all(r.level == 0.05 for r in res)


def test_mc_grid_sizes(capsys):
    assert main(["mc", "--T", "30", "--reps", "1", "--grid", "N=2,3;T=30,40", "--epsilon", "0.1",
                 "--levels", "0.05"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert len(rows) == 4


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["test"],
        ["test", "--input", "x.csv", "--kernel", "gaussian"],
        ["mc", "--grid", "nonsense"],
        ["mc", "--grid", "seed=1,2"],
        ["test", "--input", "/nonexistent/file.csv"],
    ],
)
def test_usage_errors(argv):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_parse_error_exit(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,a,b\n2020-01-01,1,2\n2020-01-02,1\n")
    assert main(["test", "--input", str(bad)]) == 2
    assert "line 3" in capsys.readouterr().err


def test_too_short_is_usage(tmp_path):
    short = tmp_path / "short.csv"
    short.write_text("a,b\n" + "\n".join("1,2" for _ in range(5)) + "\n")
    assert main(["test", "--input", str(short)]) == 1


def test_numerical_failure_exit(tmp_path, monkeypatch):
    import panelbreak.cli as cli
    from panelbreak.errors import NumericalFailure

    def boom(*a, **k):
        raise NumericalFailure("eigen_process: no convergence")

    monkeypatch.setattr(cli, "run_test", boom)
    f = tmp_path / "p.csv"
    f.write_text("a,b\n" + "\n".join(f"{i},{i * i % 7}" for i in range(30)) + "\n")
    assert main(["test", "--input", str(f)]) == 3


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "panelbreak", "sim", "--T", "20", "--N", "2"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.splitlines()[0] == "x1,x2" and len(proc.stdout.splitlines()) == 21
