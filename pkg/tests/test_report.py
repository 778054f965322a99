import csv
import json
import math

import pytest

from autoqsar import ModelSpec, PipelineConfig, rank, report, run_pipeline
from autoqsar.dataset import SplitSpec
from autoqsar.errors import NoSuccessfulModelsError
from autoqsar.pipeline import ScoreCard
from autoqsar.report import histogram_rows, scatter_svg, svg_points
from autoqsar.synthetic import synthetic_dataset


@pytest.fixture(scope="module")
def ds():
    return synthetic_dataset(36, seed=2)


@pytest.fixture(scope="module")
def rm(ds):
    return run_pipeline(PipelineConfig(models_per_interval=2, methods=("pls", "rp")), ds)


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_bundle_contents(rm, ds, tmp_path):
    files = report(rm, ds, tmp_path)
    rows = read_csv(files["predictions"])
    assert len(rows) == len(ds)
    assert [r["id"] for r in rows] == list(ds.ids)
    train = set(rm.best.split.train_ids)
    assert {r["id"] for r in rows if r["set"] == "train"} == train
    assert {r["id"] for r in rows if r["set"] == "test"} == set(rm.best.split.test_ids)
    svg = files["scatter"].read_text()
    assert len(svg_points(svg)) == len(ds)
    assert 'class="identity"' in svg


def test_histogram_totals(rm, ds, tmp_path):
    files = report(rm, ds, tmp_path)
    hist = read_csv(files["histogram"])
    assert len(hist) == 10
    assert sum(int(h["full"]) for h in hist) == len(ds)
    assert sum(int(h["train"]) for h in hist) == len(rm.best.split.train_ids)
    assert all(int(h["train"]) + int(h["test"]) == int(h["full"]) for h in hist)


def test_summary_has_wall_times(rm, ds, tmp_path):
    files = report(rm, ds, tmp_path)
    summ = json.loads(files["summary"].read_text())
    assert len(summ["top"]) == 10
    assert all(c["wall_time"] >= 0 for c in summ["top"])
    assert summ["run_wall_time"] > 0
    assert [c["model_id"] for c in summ["top"]] == [c.model_id for c in rm.cards[:10]]
    assert "time_s" in files["summary_text"].read_text()


def test_perfect_model_on_identity_line():
    rows = [(f"m{i}", "train" if i % 3 else "test", 4.0 + 0.37 * i, 4.0 + 0.37 * i) for i in range(25)]
    pts = svg_points(scatter_svg(rows))
    assert len(pts) == 25
    for (_, which, exp, _), (cls, x, y) in zip(rows, pts):
        assert cls == which
        assert abs(x - y) < 1e-9
        assert abs(x - exp) < 1e-9


def test_scatter_recovers_values():
    rows = [("a", "train", 5.0, 5.5), ("b", "test", 7.0, 6.1), ("c", "train", 6.0, 6.0)]
    for (_, _, exp, pred), (_, x, y) in zip(rows, svg_points(scatter_svg(rows))):
        assert x == pytest.approx(exp, abs=1e-9)
        assert y == pytest.approx(pred, abs=1e-9)


def test_scatter_escapes_ids():
    svg = scatter_svg([("<a&b>", "train", 1.0, 1.0)], title="x<y")
    assert "<a&b>" not in svg and "&lt;a&amp;b&gt;" in svg


def test_histogram_rows_single_value():
    rows = [("a", "train", 5.0, 5.0), ("b", "test", 5.0, 5.0)]
    hist = histogram_rows(rows)
    assert sum(h[4] for h in hist) == 2


def test_no_successful_models(ds, tmp_path):
    split = SplitSpec(0.75, 1, ds.ids[:27], ds.ids[27:])
    failed = ScoreCard("x", "PLS/descriptors", math.nan, math.nan, math.nan, None, split, status="failed")
    rm = rank([failed])
    with pytest.raises(NoSuccessfulModelsError):
        report(rm, ds, tmp_path)
    with pytest.raises(NoSuccessfulModelsError):
        rm.best


def test_unretained_top_model(rm, ds, tmp_path):
    bare = rank(rm.cards)
    with pytest.raises(NoSuccessfulModelsError):
        report(bare, ds, tmp_path)


def test_bayes_top_model_report(ds, tmp_path):
    config = PipelineConfig(models_per_interval=1, methods=(ModelSpec("BAYES", "radial"),),
                            classification_threshold=float(ds.activities.mean()))
    rm = run_pipeline(config, ds)
    rows = read_csv(report(rm, ds, tmp_path)["predictions"])
    assert {float(r["predicted"]) for r in rows} <= {0.0, 1.0}
