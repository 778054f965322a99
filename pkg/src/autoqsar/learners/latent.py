"""Latent-variable regressors: PLS (NIPALS), PCR and kernel PLS.

All functions here work on already-preprocessed inputs: a column-centred
feature matrix or a centred Gram matrix, and a centred response.  Each
``*_path`` function returns the coefficients for every component count
``1..N`` from a single decomposition, which is what makes cross-validated
component selection cheap.
"""

import numpy as np

from .. import kernels
from .._hashing import MASK64, splitmix64

REL_TOL = 1e-10


def pls_path(Z, yc, max_n):
    """Regression vectors for 1..k components, k <= max_n (k < max_n if X runs out)."""
    tol = REL_TOL * max(np.linalg.norm(Z.T @ yc), 1e-300)
    W, P, q = kernels.pls1_nipals(np.ascontiguousarray(Z), np.ascontiguousarray(yc), int(max_n), tol)
    coefs = []
    for a in range(1, W.shape[1] + 1):
        Wa, Pa = W[:, :a], P[:, :a]
        coefs.append(Wa @ np.linalg.solve(Pa.T @ Wa, q[:a]))
    return coefs


def pcr_path(Z, yc, max_n):
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    if s.size == 0:
        return []
    tol = s[0] * max(Z.shape) * np.finfo(float).eps
    rank = int((s > tol).sum())
    proj = (U[:, :rank].T @ yc) / s[:rank]
    coefs = []
    for a in range(1, min(rank, int(max_n)) + 1):
        coefs.append(Vt[:a].T @ proj[:a])
    return coefs


def kpls_path(Kc, yc, max_n):
    """Dual coefficients alpha_a with predictions Kc_test @ alpha_a."""
    tol = REL_TOL * max(np.linalg.norm(Kc @ yc), 1e-300)
    T, U = kernels.kpls1_nipals(np.ascontiguousarray(Kc), np.ascontiguousarray(yc), int(max_n), tol)
    coefs = []
    KU = Kc @ U
    for a in range(1, T.shape[1] + 1):
        Ta, Ua = T[:, :a], U[:, :a]
        coefs.append(Ua @ np.linalg.solve(Ta.T @ KU[:, :a], Ta.T @ yc))
    return coefs


def matrix_rank(Z):
    if Z.size == 0:
        return 0
    return int(np.linalg.matrix_rank(Z))


def kernel_rank(Kc):
    if Kc.size == 0:
        return 0
    w = np.linalg.eigvalsh((Kc + Kc.T) / 2)
    top = max(abs(w).max(), 1e-300)
    return int((w > top * Kc.shape[0] * 1e-12).sum())


# ---------------------------------------------------------------------------
# kernels on descriptor rows and Gram matrix centring


def sq_distances(A, B):
    d = (A ** 2).sum(1)[:, None] + (B ** 2).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def median_gamma(Z):
    d2 = sq_distances(Z, Z)
    iu = np.triu_indices(Z.shape[0], 1)
    med = float(np.median(np.sqrt(d2[iu]))) if iu[0].size else 0.0
    return 1.0 / med ** 2 if med > 0 else 1.0


def descriptor_kernel(A, B, kind, gamma):
    if kind == "linear":
        return A @ B.T
    return np.exp(-gamma * sq_distances(A, B))


def centering_stats(K):
    return K.mean(axis=0), float(K.mean())


def center_train(K, col_mean, total_mean):
    return K - col_mean[None, :] - col_mean[:, None] + total_mean


def center_cross(Kt, col_mean, total_mean):
    """Centre a (test x train) kernel block with the training statistics."""
    return Kt - Kt.mean(axis=1, keepdims=True) - col_mean[None, :] + total_mean


# ---------------------------------------------------------------------------
# cross-validated component selection


def fold_assignment(row_keys, n_folds, seed):
    """Fold index per row from content keys, so row order does not matter."""
    mixed = [splitmix64((int(k) ^ int(seed)) & MASK64) for k in row_keys]
    order = sorted(range(len(mixed)), key=lambda i: (mixed[i], int(row_keys[i])))
    folds = np.empty(len(mixed), dtype=np.int64)
    for rank, i in enumerate(order):
        folds[i] = rank % n_folds
    return folds


def pick_components(mean_q2, tie_tol=1e-9):
    """Smallest N whose mean CV q2 is within ``tie_tol`` of the best."""
    mean_q2 = np.asarray(mean_q2, dtype=np.float64)
    best = np.nanmax(mean_q2)
    return int(np.flatnonzero(mean_q2 >= best - tie_tol)[0]) + 1


def cv_q2_curve(kind, data, y, folds, max_n):
    """Mean fold q2 for N = 1..max_n.

    ``kind`` is ``"PLS"``/``"PCR"`` with ``data`` the standardized matrix, or
    ``"KPLS"`` with ``data`` the raw (uncentred) training Gram matrix.
    """
    n_folds = int(folds.max()) + 1
    scores = np.zeros(max_n)
    used = 0
    for f in range(n_folds):
        te = folds == f
        tr = ~te
        y_tr, y_te = y[tr], y[te]
        sst = float(((y_te - y_tr.mean()) ** 2).sum())
        if sst == 0.0 or tr.sum() < 2:
            continue
        ym = y_tr.mean()
        if kind == "KPLS":
            K_tr = data[np.ix_(tr, tr)]
            cm, tm = centering_stats(K_tr)
            path = kpls_path(center_train(K_tr, cm, tm), y_tr - ym, max_n)
            Kt = center_cross(data[np.ix_(te, tr)], cm, tm)
            preds = [Kt @ a + ym for a in path]
        else:
            mu = data[tr].mean(axis=0)
            Z_tr = data[tr] - mu
            path = (pls_path if kind == "PLS" else pcr_path)(Z_tr, y_tr - ym, max_n)
            Z_te = data[te] - mu
            preds = [Z_te @ b + ym for b in path]
        if not preds:
            preds = [np.full(te.sum(), ym)]
        for a in range(max_n):
            p = preds[min(a, len(preds) - 1)]
            scores[a] += 1.0 - float(((y_te - p) ** 2).sum()) / sst
        used += 1
    if used == 0:
        return np.zeros(max_n)
    return scores / used
