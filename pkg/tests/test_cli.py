import csv

import pytest

from dpfrugal.cli import main


def test_run_to_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    code = main(["run", "--n", "5000", "--reps", "2", "--q", "0.5", "--seed", "3", "--out", str(out)])
    assert code == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 3 and rows[-1]["rep"] == "mean"


def test_run_stdout(capsys):
    assert main(["run", "--n", "2000", "--reps", "1", "--mech", "zcdp", "--rho", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("rep,dataset,mechanism")
    assert len(lines) == 3


def test_run_input_replay(tmp_path):
    stream = tmp_path / "s.txt"
    assert main(["generate", "--dist", "d1", "--n", "3000", "--seed", "2", "--digits", "1", "--out", str(stream)]) == 0
    out = tmp_path / "r.csv"
    assert main(["run", "--input", str(stream), "--reps", "1", "--q", "0.5", "--out", str(out)]) == 0
    row = next(csv.DictReader(out.open()))
    assert row["dataset"] == "s.txt" and row["n"] == "3000"
    assert 400 < float(row["true_quantile"]) < 600


def test_generate_file(tmp_path):
    out = tmp_path / "g.txt"
    assert main(["generate", "--dist", "normal:mu=0,sigma=1", "--n", "10", "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# normal") and len(lines) == 11
    assert all(l.lstrip("-").isdigit() for l in lines[1:])


def test_sweep_writes_one_csv(tmp_path):
    code = main(["sweep", "--param", "rho", "--values", "0.5,5", "--mech", "zcdp", "--n", "3000", "--reps", "1",
                 "--out-dir", str(tmp_path)])
    assert code == 0
    rows = list(csv.DictReader((tmp_path / "sweep_rho_zcdp.csv").open()))
    assert [r["rho"] for r in rows] == ["0.5", "0.5", "5.0", "5.0"]


def test_sensitivity_output(capsys):
    assert main(["sensitivity", "--n", "1000", "--trials", "200", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "immediate_max_divergence" in out and "persistent_max_divergence" in out


def test_accuracy_output(capsys):
    assert main(["accuracy", "--beta", "0.04"]) == 0
    out = capsys.readouterr().out
    assert "6.4378" in out and "9.1867" in out and "2.4758" in out


@pytest.mark.parametrize("argv", [
    ["run", "--n", "0"],
    ["run", "--q", "1.5", "--n", "10"],
    ["run", "--dist", "d9", "--n", "10"],
    ["run", "--mech", "gauss", "--delta", "2", "--n", "10"],
    ["run", "--mech", "bogus"],
    ["accuracy", "--beta", "1.5"],
    ["nosuchcommand"],
])
def test_validation_exit_code(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        code = main(argv)
        raise SystemExit(code)
    assert exc.value.code == 1


def test_runtime_failure_exit_code(tmp_path, capsys):
    assert main(["run", "--input", str(tmp_path / "missing.txt"), "--reps", "1"]) == 2
