import json

import numpy as np
import pytest

from conftest import random_dataset
from wmcen import Hyperparams, fit, predict
from wmcen.cli import run_cli
from wmcen.io import (ParseError, format_cell, load_csv, load_model, read_study_table,
                      render_report, save_csv, save_model)


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_plain(tmp_path):
    a = load_csv(_write(tmp_path, "a.csv", "1,2\n3,4\n5,6"))
    np.testing.assert_array_equal(a, [[1, 2], [3, 4], [5, 6]])


def test_load_csv_ragged_names_line(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        load_csv(_write(tmp_path, "a.csv", "1,2\n3\n5,6"))


def test_load_csv_header(tmp_path):
    a = load_csv(_write(tmp_path, "a.csv", "a,b\n1,2\n3,4\n"), has_header=True)
    assert a.shape == (2, 2)


def test_load_csv_non_numeric(tmp_path):
    with pytest.raises(ParseError, match="line 2, column 2"):
        load_csv(_write(tmp_path, "a.csv", "1,2\n3,x\n"))


def test_load_csv_delimiter(tmp_path):
    a = load_csv(_write(tmp_path, "a.tsv", "1\t2\n3\t4\n"), delimiter="\t")
    assert a.shape == (2, 2)


def test_load_csv_missing_file(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_csv(tmp_path / "none.csv")


def test_model_round_trip_bit_exact(rng, tmp_path):
    d = random_dataset(rng, 12, 3, 3)
    res = fit(d, Hyperparams(0.2, 0.5, 2))
    save_model(tmp_path / "m.json", res)
    back = load_model(tmp_path / "m.json")
    x_new = rng.standard_normal((5, 3))
    np.testing.assert_array_equal(predict(back.b, back.intercepts, x_new), res.predict(x_new))
    np.testing.assert_array_equal(back.clusters.labels, res.clusters.labels)
    assert json.loads((tmp_path / "m.json").read_text())["schema_version"] == 1


def test_model_schema_checked(tmp_path):
    _write(tmp_path, "m.json", json.dumps({"schema_version": 99}))
    with pytest.raises(ParseError, match="schema"):
        load_model(tmp_path / "m.json")


def test_format_cell():
    assert format_cell(0.70612, 0.0101) == "0.706 (0.010)"


@pytest.fixture
def csv_pair(rng, tmp_path):
    d = random_dataset(rng, 15, 3, 2)
    save_csv(tmp_path / "x.csv", d.x)
    save_csv(tmp_path / "y.csv", d.y)
    return d, tmp_path


def test_cli_fit_and_predict(csv_pair, capsys):
    d, tmp = csv_pair
    assert run_cli(["fit", "--x", str(tmp / "x.csv"), "--y", str(tmp / "y.csv"),
                    "--lambda", "0.2", "--gamma", "0.5", "--k", "2",
                    "--out", str(tmp / "m.json")]) == 0
    assert (tmp / "m.json").exists()
    assert run_cli(["predict", "--model", str(tmp / "m.json"), "--x", str(tmp / "x.csv"),
                    "--out", str(tmp / "pred.csv")]) == 0
    direct = fit(d, Hyperparams(0.2, 0.5, 2)).predict(d.x)
    np.testing.assert_array_equal(load_csv(tmp / "pred.csv"), direct)


def test_cli_predict_dimension_mismatch(csv_pair, rng, capsys):
    d, tmp = csv_pair
    run_cli(["fit", "--x", str(tmp / "x.csv"), "--y", str(tmp / "y.csv"),
             "--lambda", "0.2", "--out", str(tmp / "m.json")])
    save_csv(tmp / "bad.csv", rng.standard_normal((4, 5)))
    code = run_cli(["predict", "--model", str(tmp / "m.json"), "--x", str(tmp / "bad.csv")])
    assert code != 0
    assert "dimension mismatch" in capsys.readouterr().err


def test_cli_k_above_q(csv_pair, capsys):
    _, tmp = csv_pair
    code = run_cli(["fit", "--x", str(tmp / "x.csv"), "--y", str(tmp / "y.csv"),
                    "--lambda", "0.2", "--gamma", "1", "--k", "3", "--out", str(tmp / "m.json")])
    assert code == 1 and "exceeds" in capsys.readouterr().err


def test_cli_unknown_flag(capsys):
    assert run_cli(["fit", "--bogus"]) == 2


def test_cli_cv(csv_pair, capsys):
    _, tmp = csv_pair
    code = run_cli(["cv", "--x", str(tmp / "x.csv"), "--y", str(tmp / "y.csv"),
                    "--lambdas", "0.1,1", "--gammas", "0,0.5", "--ks", "1,2", "--folds", "3",
                    "--out", str(tmp / "cv.csv")])
    assert code == 0
    assert len((tmp / "cv.csv").read_text().splitlines()) == 1 + 8
    assert capsys.readouterr().out.startswith("lambda ")


def test_cli_simulate_and_report(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("WMCEN_SEED", "4")
    out = tmp_path / "s.csv"
    assert run_cli(["simulate", "--reps", "1", "--method", "both", "--tol", "1e-2",
                    "--out", str(out)]) == 0
    rows = read_study_table(out)
    assert [r["method"] for r in rows] == ["wmcen", "wlasso"]
    assert rows[0]["seed"] == "4"
    capsys.readouterr()
    assert run_cli(["report", "--in", str(out), "--plot", str(tmp_path / "fig")]) == 0
    text = capsys.readouterr().out
    assert "wmcen" in text and "(0.000)" in text
    assert (tmp_path / "fig_median_ape.png").stat().st_size > 0
    assert "mean and sd" in render_report(rows)
