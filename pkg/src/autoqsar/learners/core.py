"""fit / predict / select_components for every method.

Preprocessing is always estimated from the rows passed to :func:`fit`; the
pipeline passes training rows only.  Features are either a raw descriptor
matrix (full catalog columns) or a list of fingerprints.  For fingerprint
kernels a precomputed Gram block may be passed to skip recomputation; it must
be the kernel between exactly the fingerprints given.
"""

import hashlib

import numpy as np

from ..descriptors import correlation_filter
from ..errors import ConfigError, FeatureMismatchError, FitError
from ..fingerprints import Fingerprint, fold, tanimoto_kernel
from . import latent
from .bayes import fit_bernoulli_nb, predict_proba_nb
from .mlr import forward_stepwise
from .spec import ModelSpec, TrainedModel
from .tree import grow_tree, predict_tree

MIN_TRAIN_ROWS = 10


# ---------------------------------------------------------------------------
# feature handling


def _check_fps(spec, fps):
    for fp in fps:
        if not isinstance(fp, Fingerprint):
            raise FeatureMismatchError(f"{spec.label} expects Fingerprint objects")
        if fp.scheme != spec.feature_source or fp.params != spec.fp_params:
            raise FeatureMismatchError(
                f"{spec.label} expects {spec.feature_source}{spec.fp_params} fingerprints, "
                f"got {fp.scheme}{fp.params}"
            )
    return list(fps)


def _as_matrix(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise FeatureMismatchError("descriptor features must be a 2D matrix")
    if not np.isfinite(X).all():
        raise FitError("descriptor matrix contains non-finite values")
    return X


def row_keys(X, y, pre=None):
    """64-bit content key per training row (feature values + target).

    Descriptor rows are keyed on their standardized values rounded to 8
    decimals, so fold membership survives rescaling of any column.
    """
    if pre is not None and isinstance(X, np.ndarray):
        X = np.round(_standardize_apply(pre, X), 8) + 0.0
    keys = []
    for i in range(len(y)):
        h = hashlib.blake2b(digest_size=8)
        if isinstance(X, np.ndarray):
            h.update(np.ascontiguousarray(X[i]).tobytes())
        else:
            for k, c in sorted(X[i].features.items()):
                h.update(k.to_bytes(8, "little"))
                h.update(int(c).to_bytes(4, "little"))
        h.update(np.float64(y[i]).tobytes())
        keys.append(int.from_bytes(h.digest(), "little"))
    return keys


def _standardize_fit(X, max_pair_correlation):
    if max_pair_correlation is not None:
        cols = correlation_filter(X, max_pair_correlation)
    else:
        cols = np.flatnonzero(np.ptp(X, axis=0) > 0)
        if cols.size == 0:
            raise FitError("all descriptor columns are constant")
    Xs = X[:, cols]
    mean = Xs.mean(axis=0)
    scale = Xs.std(axis=0)
    return {"columns": cols, "mean": mean, "scale": scale}


def _standardize_apply(pre, X):
    return (X[:, pre["columns"]] - pre["mean"]) / pre["scale"]


# ---------------------------------------------------------------------------


def _latent_inputs(spec, X, kernel, pre):
    """Training matrix for the latent solvers: Z (PLS/PCR) or raw Gram (KPLS)."""
    if spec.method != "KPLS":
        return _standardize_apply(pre, X)
    if spec.uses_fingerprints:
        return kernel if kernel is not None else tanimoto_kernel(X)
    Z = _standardize_apply(pre, X)
    if spec.hyperparams["kernel"] == "gaussian":
        pre["gamma"] = latent.median_gamma(Z)
    else:
        pre["gamma"] = 0.0
    pre["reference_Z"] = Z
    return latent.descriptor_kernel(Z, Z, spec.hyperparams["kernel"], pre["gamma"])


def _max_components(spec, data, n_rows):
    hp = spec.hyperparams
    if spec.method == "KPLS":
        cm, tm = latent.centering_stats(data)
        rank = latent.kernel_rank(latent.center_train(data, cm, tm))
    else:
        rank = latent.matrix_rank(data - data.mean(axis=0))
    # smallest CV training fold must still support every candidate N
    fold_train = n_rows - int(np.ceil(n_rows / hp["cv_folds"]))
    return max(1, min(int(hp["max_components"]), rank, fold_train - 1))


def _cv_select(spec, data, y, keys, seed, max_n):
    folds = latent.fold_assignment(keys, int(spec.hyperparams["cv_folds"]), seed)
    curve = latent.cv_q2_curve(spec.method, data, y, folds, max_n)
    return latent.pick_components(curve), curve


def select_components(spec, X, y, max_n=None, seed=0, kernel=None, max_pair_correlation=None):
    """Number of latent components maximizing mean 5-fold CV q2 (ties -> fewest).

    ``max_n`` defaults to the spec's ``max_components``; it is always capped
    at the rank of the preprocessed training data.
    """
    spec = _coerce_spec(spec)
    if not spec.is_latent:
        raise ConfigError(f"{spec.method} has no latent components")
    y = np.asarray(y, dtype=np.float64)
    X, pre = _prepare(spec, X, y, max_pair_correlation)
    data = _latent_inputs(spec, X, kernel, pre)
    cap = _max_components(spec, data, len(y))
    if max_n is not None:
        if max_n < 1:
            raise ConfigError("max_n must be >= 1")
        cap = min(cap, int(max_n))
    n, _ = _cv_select(spec, data, y, row_keys(X, y, pre), seed, cap)
    return n


def _coerce_spec(spec):
    if isinstance(spec, str):
        return ModelSpec.parse(spec)
    return spec


def _prepare(spec, X, y, max_pair_correlation):
    if spec.uses_fingerprints:
        X = _check_fps(spec, X)
        pre = {}
    else:
        X = _as_matrix(X)
        pre = _standardize_fit(X, max_pair_correlation)
    if len(X) != len(y):
        raise FeatureMismatchError(f"{len(X)} feature rows but {len(y)} targets")
    if len(y) < MIN_TRAIN_ROWS:
        raise FitError(f"need at least {MIN_TRAIN_ROWS} training rows, got {len(y)}")
    if not np.isfinite(y).all():
        raise FitError("non-finite targets")
    if not spec.is_classifier and np.ptp(y) == 0:
        raise FitError("constant targets")
    return X, pre


def fit(spec, X, y, *, kernel=None, max_pair_correlation=None, seed=0, ids=()):
    """Fit ``spec`` on ``(X, y)`` and return an immutable :class:`TrainedModel`.

    Latent methods with ``n_components=None`` pick N by cross-validation on
    the same rows (``seed`` drives fold assignment).  An explicit N above the
    data rank is clamped.
    """
    spec = _coerce_spec(spec)
    y = np.asarray(y, dtype=np.float64)
    X, pre = _prepare(spec, X, y, max_pair_correlation)
    hp = spec.hyperparams
    n = len(y)
    y_mean = float(y.mean())
    params = {"y_mean": y_mean}
    n_comp = None
    n_features_in = 0 if spec.uses_fingerprints else X.shape[1]
    ref = tuple(X) if spec.uses_fingerprints else ()

    if spec.is_latent:
        data = _latent_inputs(spec, X, kernel, pre)
        cap = _max_components(spec, data, n)
        if hp["n_components"] is None:
            n_comp, curve = _cv_select(spec, data, y, row_keys(X, y, pre), seed, cap)
            params["cv_q2"] = curve
        else:
            n_comp = min(int(hp["n_components"]), max(cap, 1))
        yc = y - y_mean
        if spec.method == "KPLS":
            cm, tm = latent.centering_stats(data)
            pre["k_col_mean"] = cm
            pre["k_mean"] = tm
            path = latent.kpls_path(latent.center_train(data, cm, tm), yc, n_comp)
            key = "dual_coef"
        else:
            path = (latent.pls_path if spec.method == "PLS" else latent.pcr_path)(data, yc, n_comp)
            key = "coef"
        if not path:
            raise FitError(f"{spec.label}: no latent component could be extracted")
        n_comp = len(path) if len(path) < n_comp else n_comp
        params[key] = path[n_comp - 1]
    elif spec.method == "MLR":
        Z = _standardize_apply(pre, X)
        max_terms = hp["max_terms"] if hp["max_terms"] is not None else n // 5
        terms, intercept, beta = forward_stepwise(Z, y, min(int(max_terms), Z.shape[1]))
        coef = np.zeros(Z.shape[1])
        coef[terms] = beta
        params.update({"coef": coef, "intercept": intercept, "terms": np.array(terms, dtype=np.int64)})
    elif spec.method == "RP":
        Z = _standardize_apply(pre, X)
        params.update(grow_tree(Z, y, int(hp["max_depth"]), int(hp["min_leaf"])))
    else:  # BAYES
        if hp["threshold"] is None:
            raise ConfigError("BAYES requires a classification threshold")
        labels = y >= float(hp["threshold"])
        B = _bayes_bits(spec, X, pre, fit=True)
        params.update(fit_bernoulli_nb(B, labels, float(hp["alpha"])))
    return TrainedModel(spec, pre, params, n_comp, tuple(ids), ref, n_features_in)


def _bayes_bits(spec, X, pre, fit=False):
    if spec.uses_fingerprints:
        return np.vstack([fold(fp) for fp in X])
    Z = _standardize_apply(pre, X)
    if fit:
        pre["medians"] = np.median(Z, axis=0)
    return Z > pre["medians"]


def _check_predict_inputs(model, X):
    spec = model.spec
    if spec.uses_fingerprints:
        return _check_fps(spec, X)
    X = _as_matrix(X)
    if X.shape[1] != model.n_features_in:
        raise FeatureMismatchError(
            f"model was fitted on {model.n_features_in} descriptor columns, got {X.shape[1]}"
        )
    return X


def predict(model, X, *, kernel=None):
    """Predicted activities (class labels 0/1 for BAYES).

    For fingerprint KPLS, ``kernel`` may be the precomputed
    (rows x training rows) min-max block.
    """
    spec = model.spec
    X = _check_predict_inputs(model, X)
    pre, params = model.preprocessing, model.parameters
    if spec.method == "KPLS":
        if spec.uses_fingerprints:
            Kt = kernel if kernel is not None else tanimoto_kernel(list(X), list(model.reference_fps))
        else:
            Z = _standardize_apply(pre, X)
            Kt = latent.descriptor_kernel(Z, pre["reference_Z"], spec.hyperparams["kernel"], pre["gamma"])
        Kt = latent.center_cross(np.asarray(Kt, dtype=np.float64), pre["k_col_mean"], pre["k_mean"])
        return Kt @ params["dual_coef"] + params["y_mean"]
    if spec.method in ("PLS", "PCR"):
        return _standardize_apply(pre, X) @ params["coef"] + params["y_mean"]
    if spec.method == "MLR":
        return _standardize_apply(pre, X) @ params["coef"] + params["intercept"]
    if spec.method == "RP":
        return predict_tree(params, _standardize_apply(pre, X))
    return (predict_proba(model, X)[:, 1] >= 0.5).astype(np.float64)


def predict_proba(model, X):
    if not model.spec.is_classifier:
        raise ConfigError("predict_proba is only defined for BAYES models")
    X = _check_predict_inputs(model, X)
    return predict_proba_nb(model.parameters, _bayes_bits(model.spec, X, model.preprocessing))
