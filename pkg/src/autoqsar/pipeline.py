"""The automated protocol: split grid x method roster -> scored, ranked models."""

import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dataset import MIN_RECORDS, SplitSpec, fraction_grid, split_grid
from .descriptors import CATALOG_VERSION, descriptor_matrix
from .errors import ConfigError, DataError, NoSuccessfulModelsError
from .fingerprints import SCHEMES, fingerprint, tanimoto_kernel
from .learners import ModelSpec, balanced_accuracy, fit, predict, q2_test, r2_train

LOGGER = logging.getLogger(__name__)

SCORE_FORMULA = "0.5*(r2+q2) - 0.25*|r2-q2|"
MANIFEST_VERSION = 1
DEFAULT_METHODS = ("kpls", "pls", "pcr", "mlr", "rp")


def default_roster(methods=DEFAULT_METHODS, fingerprints=SCHEMES, threshold=None):
    """Expand method names into ModelSpecs.

    KPLS and BAYES get one spec per fingerprint scheme; BAYES additionally
    gets a descriptor variant, and is only included when ``threshold`` is set.
    """
    roster = []
    for name in methods:
        name = name.strip().lower()
        if not name:
            continue
        if "-" in name:
            roster.append(ModelSpec.parse(name))
        elif name == "kpls":
            roster.extend(ModelSpec("KPLS", fp) for fp in fingerprints)
        elif name == "bayes":
            if threshold is None:
                raise ConfigError("bayes requires a classification threshold")
            hp = {"threshold": float(threshold)}
            roster.extend(ModelSpec("BAYES", fp, hyperparams=hp) for fp in fingerprints)
            roster.append(ModelSpec("BAYES", hyperparams=hp))
        else:
            roster.append(ModelSpec(name.upper()))
    return tuple(roster)


@dataclass(frozen=True)
class PipelineConfig:
    frac_min: float = 0.70
    frac_max: float = 0.80
    step: float = 0.01
    models_per_interval: int = 99
    max_pair_correlation: float = 0.99
    methods: tuple = field(default_factory=default_roster)
    master_seed: int = 0
    thread_count: int = 1
    classification_threshold: float = None
    retain_models: int = 10

    def __post_init__(self):
        fraction_grid(self.frac_min, self.frac_max, self.step)  # raises on a bad grid
        if self.models_per_interval < 1:
            raise ConfigError("models_per_interval must be >= 1")
        if not 0.0 < self.max_pair_correlation <= 1.0:
            raise ConfigError("max_pair_correlation must be in (0, 1]")
        if self.thread_count < 1:
            raise ConfigError("thread_count must be >= 1")
        methods = tuple(ModelSpec.parse(m) if isinstance(m, str) else m for m in self.methods)
        if not methods:
            raise ConfigError("the method roster is empty")
        fixed = []
        for spec in methods:
            if spec.is_classifier and spec.hyperparams["threshold"] is None:
                if self.classification_threshold is None:
                    raise ConfigError("BAYES in the roster but no classification_threshold configured")
                spec = replace(spec, hyperparams={**spec.hyperparams, "threshold": float(self.classification_threshold)})
            fixed.append(spec)
        labels = [s.canonical() for s in fixed]
        if len(set(labels)) != len(labels):
            raise ConfigError("duplicate model specs in the roster")
        object.__setattr__(self, "methods", tuple(fixed))

    @property
    def fractions(self):
        return fraction_grid(self.frac_min, self.frac_max, self.step)

    @property
    def n_intervals(self):
        return len(self.fractions)

    def to_json(self):
        # thread_count is deliberately absent: results never depend on it
        return {
            "frac_min": self.frac_min,
            "frac_max": self.frac_max,
            "step": self.step,
            "models_per_interval": self.models_per_interval,
            "max_pair_correlation": self.max_pair_correlation,
            "methods": [s.to_json() for s in self.methods],
            "master_seed": self.master_seed,
            "classification_threshold": self.classification_threshold,
        }

    @classmethod
    def from_json(cls, obj, **overrides):
        kw = dict(obj)
        kw["methods"] = tuple(ModelSpec.from_json(m) for m in obj["methods"])
        kw.update(overrides)
        return cls(**kw)


@dataclass(frozen=True)
class ScoreCard:
    model_id: str
    label: str
    r2_train: float
    q2_test: float
    score: float
    n_components: int
    split: SplitSpec = field(repr=False)
    wall_time: float = 0.0
    status: str = "ok"
    error: str = ""
    classification: bool = False

    @property
    def ok(self):
        return self.status == "ok"

    def to_json(self, with_time=False):
        out = {
            "model_id": self.model_id,
            "label": self.label,
            "status": self.status,
            "r2_train": self.r2_train,
            "q2_test": self.q2_test,
            "score": self.score,
            "n_components": self.n_components,
            "classification": self.classification,
            "train_fraction": self.split.train_fraction,
            "interval": self.split.interval,
            "replicate": self.split.replicate,
            "split_seed": self.split.seed,
            "error": self.error,
        }
        if with_time:
            out["wall_time"] = self.wall_time
        return out


def score(r2, q2):
    """Mean of r2 and q2 minus a quarter of their gap."""
    return 0.5 * (r2 + q2) - 0.25 * abs(r2 - q2)


def model_id(spec, split_seed):
    h = hashlib.blake2b(f"{spec.canonical()}|{int(split_seed)}".encode(), digest_size=8)
    return h.hexdigest()


@dataclass(eq=False)
class RankedModels:
    cards: list
    failed: list = field(default_factory=list)
    models: dict = field(default_factory=dict)
    manifest: dict = field(default_factory=dict)
    dataset: object = None
    wall_time: float = 0.0

    def __len__(self):
        return len(self.cards)

    @property
    def best(self):
        if not self.cards:
            raise NoSuccessfulModelsError("no successful models")
        return self.cards[0]

    def model(self, model_id):
        return self.models[model_id]

    def manifest_bytes(self):
        return (json.dumps(self.manifest, sort_keys=True, indent=1) + "\n").encode()


def rank(cards, models=None, manifest=None):
    """Sort successful cards by score, then q2 (both descending), then model_id."""
    cards = list(cards)
    if not cards:
        raise ValueError("rank() needs at least one scorecard")
    ok = [c for c in cards if c.ok]
    failed = [c for c in cards if not c.ok]
    ok.sort(key=lambda c: (-c.score, -c.q2_test, c.model_id))
    return RankedModels(ok, failed, dict(models or {}), dict(manifest or {}))


# ---------------------------------------------------------------------------


def features_for(spec, mols):
    """Raw model inputs for ``mols``: the descriptor matrix or a fingerprint list."""
    if spec.uses_fingerprints:
        return [fingerprint(m, spec.feature_source, spec.fp_params) for m in mols]
    return descriptor_matrix(mols)


class _Features:
    """Per-run feature cache: descriptors, fingerprints and full Gram matrices."""

    def __init__(self, ds, roster):
        mols = ds.molecules
        self.descriptors = None
        self.fps = {}
        self.gram = {}
        if any(not s.uses_fingerprints for s in roster):
            self.descriptors = descriptor_matrix(mols)
        for spec in roster:
            if not spec.uses_fingerprints:
                continue
            kind = (spec.feature_source, spec.fp_params)
            if kind not in self.fps:
                self.fps[kind] = [fingerprint(m, *kind) for m in mols]
            if spec.method == "KPLS" and kind not in self.gram:
                self.gram[kind] = tanimoto_kernel(self.fps[kind])

    def rows(self, spec, idx):
        if spec.uses_fingerprints:
            fps = self.fps[(spec.feature_source, spec.fp_params)]
            return [fps[i] for i in idx]
        return self.descriptors[idx]

    def kernel(self, spec, rows, cols):
        if spec.method != "KPLS" or not spec.uses_fingerprints:
            return None
        return self.gram[(spec.feature_source, spec.fp_params)][np.ix_(rows, cols)]


def evaluate_split(spec, split, ds, features, max_pair_correlation):
    """Fit one spec on one split; returns ``(ScoreCard, TrainedModel or None)``."""
    start = time.perf_counter()
    mid = model_id(spec, split.seed)
    try:
        tr = ds.index_of(split.train_ids)
        te = ds.index_of(split.test_ids)
        y = ds.activities
        y_tr, y_te = y[tr], y[te]
        model = fit(
            spec, features.rows(spec, tr), y_tr,
            kernel=features.kernel(spec, tr, tr),
            max_pair_correlation=max_pair_correlation,
            seed=split.seed, ids=split.train_ids,
        )
        p_tr = predict(model, features.rows(spec, tr), kernel=features.kernel(spec, tr, tr))
        p_te = predict(model, features.rows(spec, te), kernel=features.kernel(spec, te, tr))
        if spec.is_classifier:
            thr = spec.hyperparams["threshold"]
            r2 = balanced_accuracy(y_tr >= thr, p_tr)
            q2 = balanced_accuracy(y_te >= thr, p_te)
        else:
            r2 = r2_train(y_tr, p_tr)
            q2 = q2_test(y_te, p_te, y_tr.mean())
        if not (np.isfinite(r2) and np.isfinite(q2)):
            raise FloatingPointError("non-finite r2/q2")
        card = ScoreCard(mid, spec.label, float(r2), float(q2), float(score(r2, q2)),
                         model.n_components, split, time.perf_counter() - start,
                         classification=spec.is_classifier)
        return card, model
    except Exception as exc:  # noqa: BLE001 - a failed fit must never abort the sweep
        card = ScoreCard(mid, spec.label, float("nan"), float("nan"), float("nan"), None, split,
                         time.perf_counter() - start, status="failed",
                         error=f"{type(exc).__name__}: {exc}", classification=spec.is_classifier)
        return card, None


def _json_float(x):
    return None if x is None or not np.isfinite(x) else float(x)


def build_manifest(config, ds, ranked, failed, n_splits):
    def card_json(c):
        d = c.to_json()
        for k in ("r2_train", "q2_test", "score"):
            d[k] = _json_float(d[k])
        return d

    keep = {c.model_id for c in ranked[: config.retain_models]}
    return {
        "manifest_version": MANIFEST_VERSION,
        "config": config.to_json(),
        "dataset_digest": ds.digest(),
        "dataset_size": len(ds),
        "catalog_version": CATALOG_VERSION,
        "score_formula": SCORE_FORMULA,
        "ranking": "score desc, q2 desc, model_id asc",
        "n_intervals": config.n_intervals,
        "n_splits": n_splits,
        "n_models": len(ranked) + len(failed),
        "n_successful": len(ranked),
        "n_failed": len(failed),
        "ranked": [card_json(c) for c in ranked],
        "failed": [card_json(c) for c in failed],
        "top_splits": {c.model_id: c.split.to_json() for c in ranked if c.model_id in keep},
    }


def run_pipeline(config, ds, progress=None):
    """Run the full sweep and return :class:`RankedModels`.

    Work units are (split, spec) pairs.  They may run on ``thread_count``
    threads; results are collected in (interval, replicate, roster) order so
    the output never depends on scheduling.
    """
    if len(ds) < MIN_RECORDS:
        raise DataError(f"dataset has {len(ds)} records; at least {MIN_RECORDS} are required")
    t0 = time.perf_counter()
    splits = split_grid(ds, config.frac_min, config.frac_max, config.step,
                        config.models_per_interval, config.master_seed)
    features = _Features(ds, config.methods)
    units = [(spec, split) for split in splits for spec in config.methods]
    LOGGER.info("running %d splits x %d specs = %d models", len(splits), len(config.methods), len(units))

    def work(unit):
        return evaluate_split(unit[0], unit[1], ds, features, config.max_pair_correlation)

    results = []
    if config.thread_count == 1:
        for k, unit in enumerate(units):
            results.append(work(unit))
            if progress is not None:
                progress(k + 1, len(units))
    else:
        with ThreadPoolExecutor(max_workers=config.thread_count) as pool:
            for k, res in enumerate(pool.map(work, units)):
                results.append(res)
                if progress is not None:
                    progress(k + 1, len(units))

    cards = [c for c, _ in results]
    ids = [c.model_id for c in cards]
    if len(set(ids)) != len(ids):
        raise ConfigError("model_id collision; change master_seed")
    ranked = rank(cards)
    keep = {c.model_id for c in ranked.cards[: config.retain_models]}
    ranked.models = {c.model_id: m for c, m in results if c.model_id in keep}
    ranked.manifest = build_manifest(config, ds, ranked.cards, ranked.failed, len(splits))
    ranked.dataset = ds
    ranked.wall_time = time.perf_counter() - t0
    n_failed = len(ranked.failed)
    if n_failed:
        LOGGER.warning("%d of %d fits failed", n_failed, len(cards))
    return ranked
