import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from fracsylv import acceptance, cli
from fracsylv.acceptance import CriterionResult
from fracsylv.exceptions import NonConvergenceError
from fracsylv.study import PDE_COLUMNS, STUDY_COLUMNS

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_caputo_study_report(capsys):
    assert cli.main(["caputo-study", "--alphas", "0.3,0.6", "--ns", "2^8,2^9,2^10,2^11", "--method", "quadratic,fft"]) == 0
    out = capsys.readouterr().out
    assert "fit alpha=0.3 method=fft" in out and "rho" in out


def test_caputo_study_csv_to_stdout(capsys):
    assert cli.main(["caputo-study", "--alpha", "0.5", "--ns", "16,32", "--out", "-"]) == 0
    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert tuple(rows[0]) == STUDY_COLUMNS and len(rows) == 3


def test_solve_writes_csv(tmp_path, capsys):
    out = tmp_path / "r.csv"
    assert cli.main(["solve", "edp3", "--nt", "100", "--alphas", "0.1,0.2", "--threads", "2", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert tuple(rows[0]) == PDE_COLUMNS
    assert [float(r["alpha"]) for r in rows] == [0.1, 0.2]
    assert "edp3: alpha=0.1" in capsys.readouterr().out


def test_solve_config(capsys):
    assert cli.main(["solve", "--config", str(CONFIGS / "edp2.json"), "--nt", "60", "--nx", "8"]) == 0
    assert "N_x=8" in capsys.readouterr().out


def test_speed_bench(capsys):
    assert cli.main(["speed-bench", "--ns", "256,1024"]) == 0
    assert "speedup" in capsys.readouterr().out


def test_opmatrix_dump(tmp_path, capsys):
    path = tmp_path / "d.csv"
    assert cli.main(["opmatrix-dump", "--alpha", "0.5", "--n", "6", "--out", str(path)]) == 0
    M = np.loadtxt(path, delimiter=",")
    assert M.shape == (7, 7) and np.all(M[0] == 0)
    assert cli.main(["opmatrix-dump", "--n", "3", "--form", "literal"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) >= 4


@pytest.mark.parametrize(
    "argv",
    [
        ["opmatrix-dump", "--n", "40000"],
        ["opmatrix-dump"],
        ["solve"],
        ["solve", "--config", "/nonexistent/x.json"],
        ["caputo-study", "--function", "sin(t)"],
        ["caputo-study", "--alpha", "1.5"],
        ["caputo-study", "--ns", "1"],
        ["solve", "edp3", "--threads", "0"],
        [],
    ],
)
def test_configuration_errors_exit_2(argv, capsys):
    assert cli.main(argv) == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["caputo-study", "--ns", "a,b"])
    assert info.value.code == 2


def test_evaluation_error_is_configuration_error(tmp_path):
    cfg = json.loads((CONFIGS / "edp3.json").read_text())
    cfg["a1"] = "ln(x - 5)"
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    assert cli.main(["solve", "--config", str(path), "--nt", "20"]) == 2


def test_numerical_failure_exit_3(monkeypatch):
    import fracsylv.study as study

    def boom(*a, **k):
        raise NonConvergenceError("QR iteration did not converge")

    monkeypatch.setattr(study, "run_pde_case", boom)
    assert cli.main(["solve", "edp3"]) == 3


@pytest.mark.parametrize("passed, code", [(True, 0), (False, 4)])
def test_self_test_exit_codes(monkeypatch, capsys, passed, code):
    fake = [CriterionResult(1, "one", True, "ok", 0.0), CriterionResult(2, "two", passed, "x", 0.0)]

    def run_all(echo=print):
        for r in fake:
            echo(r.line())
        return fake

    monkeypatch.setattr(acceptance, "run_all", run_all)
    assert cli.main(["--self-test"]) == code
    out = capsys.readouterr().out
    assert "[PASS]  1. one" in out
