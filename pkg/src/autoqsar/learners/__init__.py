"""Regression (and one classification) model families with CV-tuned components."""

from .core import fit, predict, predict_proba, select_components
from .metrics import balanced_accuracy, metrics, q2_test, r2_train
from .spec import LATENT_METHODS, METHODS, ModelSpec, TrainedModel

__all__ = [
    "ModelSpec",
    "TrainedModel",
    "METHODS",
    "LATENT_METHODS",
    "fit",
    "predict",
    "predict_proba",
    "select_components",
    "metrics",
    "r2_train",
    "q2_test",
    "balanced_accuracy",
]
