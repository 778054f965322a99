import io
import json
import warnings
import zipfile

import numpy as np
import pytest

from autoqsar import ModelSpec, PipelineConfig, fit, load_model, load_run, predict, run_pipeline, save_models
from autoqsar.errors import CorruptArchiveError, DataError, SchemaVersionError
from autoqsar.persistence import DigestMismatchWarning, SCHEMA_VERSION, model_to_bytes, save_model
from autoqsar.pipeline import features_for
from autoqsar.synthetic import synthetic_dataset

SPECS = [
    ModelSpec("PLS"), ModelSpec("PCR"), ModelSpec("MLR"), ModelSpec("RP"), ModelSpec("KPLS"),
    ModelSpec("KPLS", "radial"), ModelSpec("KPLS", "dendritic", 4),
    ModelSpec("BAYES", hyperparams={"threshold": 6.0}), ModelSpec("BAYES", "linear", hyperparams={"threshold": 6.0}),
]


@pytest.fixture(scope="module")
def ds():
    return synthetic_dataset(40, seed=5)


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label)
def test_round_trip_is_bit_identical(tmp_path, ds, spec):
    X = features_for(spec, ds.molecules)
    model = fit(spec, X, ds.activities, max_pair_correlation=0.99, ids=ds.ids)
    path = save_model(model, tmp_path / "m.model")
    loaded = load_model(path)
    assert np.array_equal(predict(model, X), predict(loaded, X))
    assert loaded.spec == spec
    assert loaded.n_components == model.n_components
    assert loaded.training_ids == ds.ids


def test_archive_bytes_deterministic(ds):
    spec = ModelSpec("PLS")
    X = features_for(spec, ds.molecules)
    a = fit(spec, X, ds.activities)
    b = fit(spec, X, ds.activities)
    assert model_to_bytes(a) == model_to_bytes(b)


def _rewrite(src, dst, edit):
    with zipfile.ZipFile(src) as zin, zipfile.ZipFile(dst, "w") as zout:
        for name in zin.namelist():
            data = zin.read(name)
            zout.writestr(name, edit(name, data))


def _fitted(tmp_path, ds):
    spec = ModelSpec("PLS")
    model = fit(spec, features_for(spec, ds.molecules), ds.activities)
    return save_model(model, tmp_path / "ok.model")


def test_wrong_schema_version(tmp_path, ds):
    src = _fitted(tmp_path, ds)

    def bump(name, data):
        if name != "model.json":
            return data
        meta = json.loads(data)
        meta["schema_version"] = SCHEMA_VERSION + 1
        return json.dumps(meta)

    _rewrite(src, tmp_path / "v2.model", bump)
    with pytest.raises(SchemaVersionError):
        load_model(tmp_path / "v2.model")


def test_truncated_archive(tmp_path, ds):
    src = _fitted(tmp_path, ds)
    bad = tmp_path / "trunc.model"
    bad.write_bytes(src.read_bytes()[:200])
    with pytest.raises(CorruptArchiveError):
        load_model(bad)
    (tmp_path / "junk.model").write_bytes(b"not a zip")
    with pytest.raises(CorruptArchiveError):
        load_model(tmp_path / "junk.model")


def test_tampered_parameters_fail_probe(tmp_path, ds):
    src = _fitted(tmp_path, ds)

    def nudge(name, data):
        if name != "arrays.npz":
            return data
        with np.load(io.BytesIO(data)) as npz:
            arrays = {k: npz[k] for k in npz.files}
        arrays["par/coef"] = arrays["par/coef"] * (1 + 1e-15) + 1e-12
        buf = io.BytesIO()
        np.savez(buf, **arrays)
        return buf.getvalue()

    _rewrite(src, tmp_path / "tampered.model", nudge)
    with pytest.raises(CorruptArchiveError, match="probe"):
        load_model(tmp_path / "tampered.model")


def test_missing_member(tmp_path, ds):
    src = _fitted(tmp_path, ds)
    with zipfile.ZipFile(src) as zin, zipfile.ZipFile(tmp_path / "partial.model", "w") as zout:
        zout.writestr("model.json", zin.read("model.json"))
    with pytest.raises(CorruptArchiveError):
        load_model(tmp_path / "partial.model")


def test_missing_file_raises_file_not_found(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_model(tmp_path / "absent.model")


@pytest.fixture(scope="module")
def run(ds, tmp_path_factory):
    config = PipelineConfig(models_per_interval=2, methods=("pls", "kpls-linear4", "rp"))
    rm = run_pipeline(config, ds)
    out = tmp_path_factory.mktemp("run")
    written = save_models(rm, out, top_k=3)
    return rm, out, written


def test_run_directory_layout(run):
    rm, out, written = run
    assert len(written) == 3
    for name in ("manifest.json", "scorecards.csv", "timings.json", "dataset.csv", "top.model"):
        assert (out / name).exists()
    assert (out / "manifest.json").read_bytes() == rm.manifest_bytes()
    assert (out / "top.model").read_bytes() == written[0].read_bytes()
    assert written[0].name == f"rank001_{rm.best.model_id}.model"


def test_top_model_predicts_like_in_memory(run, ds):
    rm, out, _ = run
    top = rm.model(rm.best.model_id)
    loaded, meta = load_model(out / "top.model", with_meta=True)
    X = features_for(top.spec, ds.molecules)
    assert np.array_equal(predict(top, X), predict(loaded, X))
    assert meta["run"]["config"]["max_pair_correlation"] == 0.99
    assert meta["scorecard"]["model_id"] == rm.best.model_id
    assert meta["split"]["train_ids"] == list(rm.best.split.train_ids)


def test_digest_mismatch_warns(run):
    _, out, _ = run
    with pytest.warns(DigestMismatchWarning):
        load_model(out / "top.model", expected_digest="0" * 64)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        load_model(out / "top.model", expected_digest=json.loads((out / "manifest.json").read_text())["dataset_digest"])


def test_load_run(run, ds):
    rm, out, _ = run
    back = load_run(out)
    assert [c.model_id for c in back.cards] == [c.model_id for c in rm.cards]
    assert [c.score for c in back.cards] == [c.score for c in rm.cards]
    assert back.best.split == rm.best.split
    assert back.best.wall_time == rm.best.wall_time
    assert len(back.models) == 3
    assert back.dataset.ids == ds.ids
    assert np.array_equal(back.dataset.activities, ds.activities)
    assert back.manifest == rm.manifest


def test_load_run_errors(tmp_path):
    with pytest.raises(DataError):
        load_run(tmp_path)
    (tmp_path / "manifest.json").write_text("{not json")
    with pytest.raises(CorruptArchiveError):
        load_run(tmp_path)


def test_save_models_top_k(run, tmp_path):
    with pytest.raises(ValueError):
        save_models(run[0], tmp_path, top_k=0)
