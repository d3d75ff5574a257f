"""Command line behavior: formats, files, exit codes."""

import csv
import io
import json
from importlib import resources

import numpy as np
import pytest

import tauspec as ts
from tauspec.cli import main, render_rows


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_list_examples(capsys):
    code, out, _ = run(capsys, "list-examples")
    assert code == 0
    for name in ["example1", "example2", "exp-ode", "volterra-exp"]:
        assert name in out


def test_solve_table_summary(capsys):
    code, out, _ = run(capsys, "solve", "exp-ode")
    assert code == 0
    assert "converged: yes" in out
    assert "max error vs reference" in out


def test_solve_json_document(capsys):
    code, out, _ = run(capsys, "solve", "exp-ode", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["format"] == "tauspec-solution/1"
    assert doc["problem"] == "exp-ode"
    assert doc["variables"] == ["y"]
    assert doc["n"] == 20
    assert len(doc["coefficients"]["y"]) == 20
    assert doc["converged"] is True
    assert len(doc["newton"]) == 1
    assert "seconds" not in json.dumps(doc)


def test_solve_csv_coefficients(capsys):
    code, out, _ = run(capsys, "solve", "exp-ode", "--format", "csv", "--n", "6")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["variable", "k", "coefficient"]
    assert len(rows) == 1 + 6


def test_solution_files_are_bitwise_reproducible(tmp_path, capsys):
    f1 = tmp_path / "a.json"
    f2 = tmp_path / "b.json"
    assert run(capsys, "solve", "example1", "--format", "json", "--out", str(f1))[0] == 0
    assert run(capsys, "solve", "example1", "--format", "json", "--out", str(f2))[0] == 0
    assert f1.read_bytes() == f2.read_bytes()


def test_solve_n_and_basis_overrides(capsys):
    code, out, _ = run(capsys, "solve", "example1", "--n", "9",
                       "--basis", "legendre", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == 9
    assert doc["basis"]["family"] == "LegendreP"
    assert len(doc["coefficients"]["y2"]) == 9


def test_eval_values_match_library(capsys):
    code, out, _ = run(capsys, "eval", "exp-ode", "--points", "0,0.5,1",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "y"]
    doc = json.loads(
        (resources.files("tauspec") / "problems" / "exp-ode.json").read_text())
    sol = ts.solve(ts.parse_problem(doc))
    for row, x in zip(rows[1:], [0.0, 0.5, 1.0]):
        assert float(row[0]) == x
        assert float(row[1]) == ts.evaluate(sol.series["y"], x)


def test_eval_is_reproducible(capsys):
    out1 = run(capsys, "eval", "example2", "--points", "0.1,0.9", "--format", "csv")
    out2 = run(capsys, "eval", "example2", "--points", "0.1,0.9", "--format", "csv")
    assert out1 == out2


def test_eval_empty_points_is_an_error(capsys):
    code, _, err = run(capsys, "eval", "exp-ode", "--points", "")
    assert code == 1
    assert "at least one point" in err


def test_convergence_table(capsys):
    code, out, _ = run(capsys, "convergence", "exp-ode", "--ns", "4,8,16")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split() == ["n", "error", "residual", "iterations",
                                "seconds", "failure"]
    assert len(lines) == 4


def test_convergence_json_and_csv_agree_field_by_field():
    rows = [{"n": 4, "error": 0.125, "residual": 1e-3,
             "iterations": 1, "seconds": 0.5, "failure": None},
            {"n": 8, "error": float("nan"), "residual": 2.0,
             "iterations": 0, "seconds": 0.25, "failure": "boom"}]
    columns = ["n", "error", "residual", "iterations", "seconds", "failure"]
    sj = io.StringIO()
    render_rows(rows, columns, "json", sj)
    sc = io.StringIO()
    render_rows(rows, columns, "csv", sc)
    parsed = json.loads(sj.getvalue())
    table = list(csv.DictReader(io.StringIO(sc.getvalue())))
    assert len(parsed) == len(table) == 2
    for pj, pc in zip(parsed, table):
        assert pj["n"] == int(pc["n"])
        if np.isnan(pj["error"]):
            assert pc["error"] == "nan"
        else:
            assert pj["error"] == float(pc["error"])
        assert pj["failure"] == (pc["failure"] or None)


def test_plotdata_error_columns(capsys):
    code, out, _ = run(capsys, "plotdata", "exp-ode", "--grid", "11")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["x", "abs_error_y"]
    assert len(rows) == 12
    errs = [float(r[1]) for r in rows[1:]]
    assert max(errs) < 1e-13


def test_plotdata_residual_fallback(tmp_path, capsys):
    doc = {
        "basis": {"family": "ChebyshevT", "domain": [0.0, 1.0]},
        "variables": ["y"],
        "equations": [{
            "terms": [{"var": "y", "deriv": 1}, {"var": "y", "coeff": -1.0}],
            "rhs": 0.0}],
        "conditions": [{"terms": [{"var": "y", "point": 0.0}], "value": 1.0}],
        "solve": {"n": 10},
    }
    path = tmp_path / "myode.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "plotdata", str(path), "--grid", "5")
    assert code == 0
    assert out.startswith("# no reference solution")
    rows = list(csv.reader(io.StringIO(out.split("\n", 1)[1])))
    assert rows[0] == ["x", "residual_eq0"]


def test_problem_from_path(tmp_path, capsys):
    doc = {
        "basis": {"family": "ChebyshevT", "domain": [0.0, 1.0]},
        "variables": ["y"],
        "equations": [{"terms": [{"var": "y"}], "rhs": 2.0}],
        "conditions": [],
        "solve": {"n": 3},
    }
    path = tmp_path / "const.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "eval", str(path), "--points", "0.25",
                       "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert float(rows[1][1]) == pytest.approx(2.0, abs=1e-14)


def test_unknown_problem_exits_one(capsys):
    code, _, err = run(capsys, "solve", "no-such-problem")
    assert code == 1
    assert "unknown problem" in err


def test_bad_json_exits_one(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{nope")
    code, _, err = run(capsys, "solve", str(path))
    assert code == 1
    assert "not valid JSON" in err


def test_invalid_document_exits_one(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"basis": {"family": "ChebyshevT",
                                          "domain": [0.0, 1.0]}}))
    code, _, err = run(capsys, "solve", str(path))
    assert code == 1
    assert "variables" in err


def test_nonconvergence_exits_two(capsys):
    with pytest.warns(ts.ConvergenceWarning):
        code, _, _ = run(capsys, "solve", "example1", "--max-iter", "1")
    assert code == 2


def test_singular_system_exits_three(tmp_path, capsys):
    doc = {
        "basis": {"family": "ChebyshevT", "domain": [0.0, 1.0]},
        "variables": ["y"],
        "equations": [{
            "terms": [{"var": "y", "deriv": 1}, {"var": "y", "coeff": -1.0}],
            "rhs": 0.0}],
        "conditions": [
            {"terms": [{"var": "y", "point": 0.0}], "value": 1.0},
            {"terms": [{"var": "y", "point": 0.0}], "value": 1.0},
        ],
        "solve": {"n": 5},
    }
    path = tmp_path / "singular.json"
    path.write_text(json.dumps(doc))
    code, _, err = run(capsys, "solve", str(path))
    assert code == 3
    assert "singular" in err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])  # missing problem argument
    assert exc.value.code == 1
