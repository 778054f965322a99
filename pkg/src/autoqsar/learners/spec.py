"""Model specifications and fitted-model state."""

import json
from dataclasses import dataclass, field

from ..errors import ConfigError
from ..fingerprints import DEFAULT_PARAMS, SCHEMES, check_params

METHODS = ("MLR", "PLS", "PCR", "KPLS", "RP", "BAYES")
LATENT_METHODS = frozenset({"PLS", "PCR", "KPLS"})
DESCRIPTOR_ONLY = frozenset({"MLR", "PLS", "PCR", "RP"})
KERNELS = ("tanimoto", "gaussian", "linear")

DEFAULTS = {
    "MLR": {"max_terms": None},
    "PLS": {"n_components": None, "max_components": 10, "cv_folds": 5},
    "PCR": {"n_components": None, "max_components": 10, "cv_folds": 5},
    "KPLS": {"n_components": None, "max_components": 10, "cv_folds": 5, "kernel": None},
    "RP": {"max_depth": 8, "min_leaf": 5},
    "BAYES": {"threshold": None, "alpha": 1.0},
}


@dataclass(frozen=True)
class ModelSpec:
    """What to fit and on which features.

    ``feature_source`` is ``"descriptors"`` or a fingerprint scheme name, in
    which case ``fp_params`` holds the radius / path length.  Missing
    hyperparameters are filled with the frozen defaults on construction so
    they end up recorded in model files.
    """

    method: str
    feature_source: str = "descriptors"
    fp_params: int = None
    hyperparams: dict = field(default_factory=dict)

    def __post_init__(self):
        method = str(self.method).upper()
        if method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        object.__setattr__(self, "method", method)
        source = self.feature_source
        if source != "descriptors":
            if source not in SCHEMES:
                raise ConfigError(f"unknown feature source {source!r}")
            if method in DESCRIPTOR_ONLY:
                raise ConfigError(f"{method} requires descriptor features, not {source!r}")
            object.__setattr__(self, "fp_params", check_params(source, self.fp_params))
        elif self.fp_params is not None:
            raise ConfigError("fp_params only applies to fingerprint sources")
        unknown = set(self.hyperparams) - set(DEFAULTS[method])
        if unknown:
            raise ConfigError(f"unknown hyperparameter(s) for {method}: {sorted(unknown)}")
        hp = dict(DEFAULTS[method])
        hp.update(self.hyperparams)
        if method == "KPLS":
            if hp["kernel"] is None:
                hp["kernel"] = "gaussian" if source == "descriptors" else "tanimoto"
            if hp["kernel"] not in KERNELS:
                raise ConfigError(f"unknown kernel {hp['kernel']!r}")
            if (hp["kernel"] == "tanimoto") != (source != "descriptors"):
                raise ConfigError("the tanimoto kernel is for fingerprints; gaussian/linear for descriptors")
        if method in LATENT_METHODS:
            if hp["n_components"] is not None and int(hp["n_components"]) < 1:
                raise ConfigError("n_components must be >= 1")
            if int(hp["max_components"]) < 1:
                raise ConfigError("max_components must be >= 1")
            if int(hp["cv_folds"]) < 2:
                raise ConfigError("cv_folds must be >= 2")
        if method == "RP" and (int(hp["max_depth"]) < 1 or int(hp["min_leaf"]) < 1):
            raise ConfigError("RP needs max_depth >= 1 and min_leaf >= 1")
        if method == "BAYES" and hp["alpha"] <= 0:
            raise ConfigError("alpha must be positive")
        object.__setattr__(self, "hyperparams", hp)

    @property
    def uses_fingerprints(self):
        return self.feature_source != "descriptors"

    @property
    def is_latent(self):
        return self.method in LATENT_METHODS

    @property
    def is_classifier(self):
        return self.method == "BAYES"

    @property
    def label(self):
        if self.uses_fingerprints:
            return f"{self.method}/{self.feature_source}{self.fp_params}"
        if self.method == "KPLS":
            return f"KPLS/descriptors-{self.hyperparams['kernel']}"
        return f"{self.method}/descriptors"

    def to_json(self):
        return {
            "method": self.method,
            "feature_source": self.feature_source,
            "fp_params": self.fp_params,
            "hyperparams": dict(sorted(self.hyperparams.items())),
        }

    def canonical(self):
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, obj):
        return cls(obj["method"], obj["feature_source"], obj.get("fp_params"), dict(obj["hyperparams"]))

    @classmethod
    def parse(cls, text, **hyperparams):
        """``"pls"``, ``"kpls-radial"``, ``"kpls-radial2"``, ``"kpls-gaussian"``, ``"bayes-linear"``."""
        parts = text.strip().lower().split("-", 1)
        method = parts[0].upper()
        if len(parts) == 1:
            return cls(method, hyperparams=hyperparams)
        rest = parts[1]
        if rest in KERNELS and rest != "tanimoto":
            return cls(method, hyperparams={**hyperparams, "kernel": rest})
        if rest == "descriptors":
            return cls(method, hyperparams=hyperparams)
        scheme = rest.rstrip("0123456789")
        digits = rest[len(scheme):]
        if scheme not in SCHEMES:
            raise ConfigError(f"cannot parse model spec {text!r}")
        params = int(digits) if digits else DEFAULT_PARAMS[scheme]
        return cls(method, scheme, params, hyperparams)


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Fitted learner: everything needed to predict from raw features.

    ``preprocessing`` holds the descriptor column subset and standardization
    (or the kernel reference state); ``parameters`` holds the method's fitted
    arrays.  Both are plain dicts of scalars, lists and numpy arrays.
    """

    spec: ModelSpec
    preprocessing: dict
    parameters: dict
    n_components: int = None
    training_ids: tuple = ()
    reference_fps: tuple = field(default=(), repr=False)
    n_features_in: int = 0
