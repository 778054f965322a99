"""Bernoulli naive Bayes over binary features (two classes)."""

import numpy as np

from ..errors import FitError

# 2048 folded bits easily push the log-odds past float range; keep posteriors
# strictly inside (0, 1)
PROBA_EPS = 1e-12


def fit_bernoulli_nb(B, labels, alpha=1.0):
    B = np.asarray(B, dtype=bool)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise FitError("naive Bayes needs both activity classes in the training set")
    p_pos = (B[labels].sum(axis=0) + alpha) / (n_pos + 2 * alpha)
    p_neg = (B[~labels].sum(axis=0) + alpha) / (n_neg + 2 * alpha)
    return {
        "log_p_pos": np.log(p_pos),
        "log_1mp_pos": np.log1p(-p_pos),
        "log_p_neg": np.log(p_neg),
        "log_1mp_neg": np.log1p(-p_neg),
        "log_prior": np.log(np.array([n_neg, n_pos], dtype=float) / labels.size),
    }


def predict_proba_nb(params, B):
    """Columns: P(inactive), P(active)."""
    B = np.asarray(B, dtype=np.float64)
    ll_pos = B @ params["log_p_pos"] + (1 - B) @ params["log_1mp_pos"] + params["log_prior"][1]
    ll_neg = B @ params["log_p_neg"] + (1 - B) @ params["log_1mp_neg"] + params["log_prior"][0]
    ll = np.column_stack([ll_neg, ll_pos])
    ll -= ll.max(axis=1, keepdims=True)
    p = np.exp(ll)
    p /= p.sum(axis=1, keepdims=True)
    p_pos = np.clip(p[:, 1], PROBA_EPS, 1.0 - PROBA_EPS)
    return np.column_stack([1.0 - p_pos, p_pos])
