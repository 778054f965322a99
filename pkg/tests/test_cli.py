import csv
import json
import subprocess
import sys

import pytest

from autoqsar.cli import main
from autoqsar.synthetic import synthetic_dataset, write_csv

FAST = ["--per-interval", "1", "--frac-min", "0.75", "--frac-max", "0.76"]


@pytest.fixture(scope="module")
def data_csv(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "train.csv"
    write_csv(synthetic_dataset(30, seed=4), path)
    return path


@pytest.fixture(scope="module")
def run_dir(data_csv, tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "run"
    code = main(["build", "--input", str(data_csv), "--out", str(out), *FAST,
                 "--methods", "pls,kpls-radial,rp", "--top-k", "2"])
    assert code == 0
    return out


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_build_writes_run(run_dir, capsys):
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["n_intervals"] == 2 and manifest["n_splits"] == 2
    assert manifest["n_models"] == 6
    assert len(list((run_dir / "models").glob("*.model"))) == 2
    assert (run_dir / "top.model").exists()


def test_predict(run_dir, tmp_path, capsys):
    inp = tmp_path / "new.csv"
    inp.write_text("id,smiles\nx1,CCOCC\nx2,CCCN\n", encoding="utf-8")
    out = tmp_path / "preds.csv"
    assert main(["predict", "--model", str(run_dir / "top.model"), "--input", str(inp), "--out", str(out)]) == 0
    rows = read_csv(out)
    assert [r["id"] for r in rows] == ["x1", "x2"]
    assert all(float(r["predicted"]) == float(r["predicted"]) for r in rows)


def test_predict_without_id_column(run_dir, tmp_path):
    inp = tmp_path / "new.csv"
    inp.write_text("smiles\nCCO\n", encoding="utf-8")
    out = tmp_path / "preds.csv"
    assert main(["predict", "--model", str(run_dir / "top.model"), "--input", str(inp), "--out", str(out)]) == 0
    assert read_csv(out)[0]["id"] == "1"


def test_predict_bad_smiles_is_data_error(run_dir, tmp_path, capsys):
    inp = tmp_path / "bad.csv"
    inp.write_text("id,smiles\nx,C(C\n", encoding="utf-8")
    code = main(["predict", "--model", str(run_dir / "top.model"), "--input", str(inp), "--out", str(tmp_path / "o.csv")])
    assert code == 2
    assert "row 2" in capsys.readouterr().err


def test_report(run_dir, tmp_path, capsys):
    out = tmp_path / "report"
    assert main(["report", "--run", str(run_dir), "--out", str(out)]) == 0
    assert len(read_csv(out / "predictions.csv")) == 30
    assert (out / "scatter.svg").exists() and (out / "summary.json").exists()


def test_inspect(run_dir, tmp_path, capsys):
    assert main(["inspect", "--run", str(run_dir)]) == 0
    text = capsys.readouterr().out
    assert "KPLS/radial3" in text and "max pair corr    0.99" in text
    assert main(["inspect", "--catalog", "--out", str(tmp_path / "cat.csv")]) == 0
    assert len(read_csv(tmp_path / "cat.csv")) == 26


def test_usage_errors_exit_1(data_csv, tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["build", "--input", str(data_csv)])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    assert main(["build", "--input", str(data_csv), "--out", str(tmp_path / "r"), "--frac-min", "0.9",
                 "--frac-max", "0.8"]) == 1
    assert main(["build", "--input", str(data_csv), "--out", str(tmp_path / "r"), "--methods", "bayes"]) == 1
    assert main(["build", "--input", str(data_csv), "--out", str(tmp_path / "r"), "--top-k", "0"]) == 1


def test_data_errors_exit_2(tmp_path, capsys):
    assert main(["build", "--input", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "r")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("id,smiles,activity\na,CCO,5\nb,CX,6\n", encoding="utf-8")
    assert main(["build", "--input", str(bad), "--out", str(tmp_path / "r")]) == 2
    assert main(["predict", "--model", str(tmp_path / "none.model"), "--input", str(bad),
                 "--out", str(tmp_path / "o.csv")]) == 2
    junk = tmp_path / "junk.model"
    junk.write_bytes(b"junk")
    assert main(["predict", "--model", str(junk), "--input", str(bad), "--out", str(tmp_path / "o.csv")]) == 2
    assert main(["inspect", "--run", str(tmp_path)]) == 2
    assert main(["report", "--run", str(tmp_path), "--out", str(tmp_path / "rep")]) == 2


def test_no_successful_models_exit_3(data_csv, tmp_path, capsys):
    out = tmp_path / "r"
    code = main(["build", "--input", str(data_csv), "--out", str(out), *FAST,
                 "--methods", "bayes", "--fingerprints", "radial", "--threshold", "100"])
    assert code == 3
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_successful"] == 0 and manifest["n_failed"] == 4
    assert len(read_csv(out / "scorecards.csv")) == 4
    assert main(["report", "--run", str(out), "--out", str(tmp_path / "rep")]) == 3


def test_bayes_predict_has_probability(data_csv, tmp_path, capsys):
    out = tmp_path / "r"
    assert main(["build", "--input", str(data_csv), "--out", str(out), *FAST,
                 "--methods", "bayes", "--fingerprints", "linear", "--threshold", "6"]) == 0
    inp = tmp_path / "new.csv"
    inp.write_text("id,smiles\nx1,CCOCC\n", encoding="utf-8")
    assert main(["predict", "--model", str(out / "top.model"), "--input", str(inp), "--out", str(tmp_path / "p.csv")]) == 0
    row = read_csv(tmp_path / "p.csv")[0]
    assert 0 < float(row["p_active"]) < 1


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "autoqsar", "inspect", "--catalog"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("name,definition,units")
    res = subprocess.run([sys.executable, "-m", "autoqsar"], capture_output=True, text=True)
    assert res.returncode == 1
