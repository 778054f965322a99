"""Model archives and run directories.

A ``.model`` file is a zip archive holding

``model.json``
    schema version, model spec, scalar state, scorecard and run manifest
    excerpt (config, dataset digest, catalog version);
``arrays.npz``
    every array of the preprocessing and parameter state, plus the probe;
``fingerprints.json``
    reference fingerprints of kernel models and the probe fingerprints.

The probe is a small set of inputs together with the predictions the model
made on them at save time.  :func:`load_model` recomputes them and refuses
an archive whose predictions differ in any bit.

A run directory (``build --out``) contains ``manifest.json`` (byte-stable),
``scorecards.csv`` (including wall times), ``timings.json``,
``dataset.csv`` (the curated learning set), ``top.model`` and
``models/rankNNN_<id>.model`` for the top-k models.
"""

import csv
import io
import json
import warnings
import zipfile
from pathlib import Path

import numpy as np

from .dataset import Dataset, Record, SplitSpec
from .errors import CorruptArchiveError, DataError, SchemaVersionError
from .fingerprints import Fingerprint
from .learners import ModelSpec, TrainedModel, predict
from .pipeline import RankedModels, ScoreCard

SCHEMA_VERSION = 1
FORMAT_NAME = "autoqsar-model"


class DigestMismatchWarning(UserWarning):
    pass


def _split_state(state, prefix):
    arrays, scalars = {}, {}
    for k, v in state.items():
        if isinstance(v, np.ndarray):
            arrays[f"{prefix}/{k}"] = v
        elif isinstance(v, (np.floating, np.integer)):
            scalars[k] = v.item()
        else:
            scalars[k] = v
    return arrays, scalars


def _probe_inputs(model):
    if model.spec.uses_fingerprints:
        return list(model.reference_fps[:3])
    pre = model.preprocessing
    X = np.zeros((3, model.n_features_in))
    for r, k in enumerate((-1.0, 0.0, 1.0)):
        X[r, pre["columns"]] = pre["mean"] + k * pre["scale"]
    return X


def model_to_bytes(model, scorecard=None, manifest=None):
    pre_arrays, pre_scalars = _split_state(model.preprocessing, "pre")
    par_arrays, par_scalars = _split_state(model.parameters, "par")
    probe = _probe_inputs(model)
    expected = predict(model, probe)
    arrays = {**pre_arrays, **par_arrays, "probe/expected": np.asarray(expected, dtype=np.float64)}
    if not model.spec.uses_fingerprints:
        arrays["probe/X"] = probe
    meta = {
        "format": FORMAT_NAME,
        "schema_version": SCHEMA_VERSION,
        "spec": model.spec.to_json(),
        "n_components": model.n_components,
        "n_features_in": model.n_features_in,
        "training_ids": list(model.training_ids),
        "preprocessing": pre_scalars,
        "parameters": par_scalars,
        "scorecard": scorecard.to_json(with_time=True) if scorecard is not None else None,
        "split": scorecard.split.to_json() if scorecard is not None else None,
        "run": {
            k: manifest[k]
            for k in ("config", "dataset_digest", "catalog_version", "score_formula")
            if manifest and k in manifest
        },
    }
    fps = {
        "reference": [fp.to_json() for fp in model.reference_fps],
        "probe": [fp.to_json() for fp in probe] if model.spec.uses_fingerprints else [],
    }
    npz = io.BytesIO()
    np.savez(npz, **arrays)
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        zf.writestr("model.json", json.dumps(meta, indent=1, sort_keys=True))
        zf.writestr("arrays.npz", npz.getvalue())
        zf.writestr("fingerprints.json", json.dumps(fps))
    return buf.getvalue()


def save_model(model, path, scorecard=None, manifest=None):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(model_to_bytes(model, scorecard, manifest))
    return path


def read_archive(path):
    """Return ``(meta, arrays, fingerprints)`` after schema checks."""
    try:
        with zipfile.ZipFile(path) as zf:
            meta = json.loads(zf.read("model.json"))
            if meta.get("format") != FORMAT_NAME:
                raise CorruptArchiveError(f"{path}: not a {FORMAT_NAME} archive")
            version = meta.get("schema_version")
            if version != SCHEMA_VERSION:
                raise SchemaVersionError(
                    f"{path}: schema version {version!r}, this build reads version {SCHEMA_VERSION}"
                )
            with np.load(io.BytesIO(zf.read("arrays.npz")), allow_pickle=False) as npz:
                arrays = {k: npz[k] for k in npz.files}
            fps = json.loads(zf.read("fingerprints.json"))
    except (SchemaVersionError, CorruptArchiveError):
        raise
    except FileNotFoundError:
        raise
    except (zipfile.BadZipFile, KeyError, ValueError, OSError, EOFError) as exc:
        raise CorruptArchiveError(f"{path}: corrupted model archive ({exc})") from exc
    return meta, arrays, fps


def load_model(path, expected_digest=None, with_meta=False):
    """Rebuild a :class:`TrainedModel` and verify it against the stored probe."""
    meta, arrays, fps = read_archive(path)
    try:
        spec = ModelSpec.from_json(meta["spec"])
        pre = dict(meta["preprocessing"])
        par = dict(meta["parameters"])
        for k, v in arrays.items():
            group, name = k.split("/", 1)
            if group == "pre":
                pre[name] = v
            elif group == "par":
                par[name] = v
        reference = tuple(Fingerprint.from_json(f) for f in fps["reference"])
        model = TrainedModel(spec, pre, par, meta["n_components"], tuple(meta["training_ids"]),
                             reference, meta["n_features_in"])
        if spec.uses_fingerprints:
            probe = [Fingerprint.from_json(f) for f in fps["probe"]]
        else:
            probe = arrays["probe/X"]
        got = np.asarray(predict(model, probe), dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptArchiveError(f"{path}: incomplete model state ({exc})") from exc
    if not np.array_equal(got, arrays["probe/expected"]):
        raise CorruptArchiveError(f"{path}: probe predictions do not reproduce the saved model")
    digest = meta.get("run", {}).get("dataset_digest")
    if expected_digest is not None and digest != expected_digest:
        warnings.warn(f"{path}: dataset digest {digest} differs from {expected_digest}",
                      DigestMismatchWarning, stacklevel=2)
    return (model, meta) if with_meta else model


# ---------------------------------------------------------------------------
# run directories


def write_dataset_csv(ds, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "smiles", "activity"])
        for r in ds.records:
            w.writerow([r.id, r.smiles, repr(r.activity)])


def write_scorecards_csv(rm, path):
    cols = ["rank", "model_id", "label", "status", "r2_train", "q2_test", "score", "n_components",
            "train_fraction", "interval", "replicate", "split_seed", "wall_time", "error"]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for rank_no, card in enumerate(list(rm.cards) + list(rm.failed), start=1):
            d = card.to_json(with_time=True)
            d["rank"] = rank_no if card.ok else ""
            w.writerow([d[c] for c in cols])


def save_models(rm, path, top_k=5):
    """Write a run directory with the ``top_k`` best models."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    out = Path(path)
    (out / "models").mkdir(parents=True, exist_ok=True)
    (out / "manifest.json").write_bytes(rm.manifest_bytes())
    write_scorecards_csv(rm, out / "scorecards.csv")
    timings = {
        "run_wall_time": rm.wall_time,
        "model_wall_time_total": float(sum(c.wall_time for c in list(rm.cards) + list(rm.failed))),
    }
    (out / "timings.json").write_text(json.dumps(timings, indent=1))
    if rm.dataset is not None:
        write_dataset_csv(rm.dataset, out / "dataset.csv")
    written = []
    for r, card in enumerate(rm.cards[:top_k], start=1):
        model = rm.models.get(card.model_id)
        if model is None:
            break
        data = model_to_bytes(model, card, rm.manifest)
        target = out / "models" / f"rank{r:03d}_{card.model_id}.model"
        target.write_bytes(data)
        if r == 1:
            (out / "top.model").write_bytes(data)
        written.append(target)
    return written


def _card_from_json(d, split):
    nan = float("nan")
    return ScoreCard(
        d["model_id"], d["label"],
        nan if d["r2_train"] is None else d["r2_train"],
        nan if d["q2_test"] is None else d["q2_test"],
        nan if d["score"] is None else d["score"],
        d["n_components"], split, d.get("wall_time", 0.0), d["status"], d["error"], d["classification"],
    )


def load_run(path):
    """Reload a run directory as :class:`RankedModels` (saved models only)."""
    run = Path(path)
    try:
        manifest = json.loads((run / "manifest.json").read_text())
    except FileNotFoundError:
        raise DataError(f"{run}: no manifest.json; not a run directory") from None
    except ValueError as exc:
        raise CorruptArchiveError(f"{run}/manifest.json: {exc}") from exc
    walls = {}
    sc = run / "scorecards.csv"
    if sc.exists():
        with open(sc, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                walls[row["model_id"]] = float(row["wall_time"])
    top_splits = manifest.get("top_splits", {})

    def card(d):
        sp = top_splits.get(d["model_id"])
        split = SplitSpec.from_json(sp) if sp else SplitSpec(d["train_fraction"], d["split_seed"], (), (),
                                                             d["interval"], d["replicate"])
        d = dict(d, wall_time=walls.get(d["model_id"], 0.0))
        return _card_from_json(d, split)

    cards = [card(d) for d in manifest["ranked"]]
    failed = [card(d) for d in manifest["failed"]]
    models = {}
    for f in sorted((run / "models").glob("rank*.model")):
        mid = f.stem.split("_", 1)[1]
        models[mid] = load_model(f, expected_digest=manifest.get("dataset_digest"))
    ds = None
    if (run / "dataset.csv").exists():
        ds = _read_run_dataset(run / "dataset.csv")
    timings = {}
    if (run / "timings.json").exists():
        timings = json.loads((run / "timings.json").read_text())
    return RankedModels(cards, failed, models, manifest, ds, timings.get("run_wall_time", 0.0))


def _read_run_dataset(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    recs = tuple(Record(r["id"], r["smiles"], float(r["activity"])) for r in rows)
    return Dataset(recs, str(path))
