"""Hot numeric kernels.

Every kernel exists twice: a ``*_nb`` version compiled with numba and a
``*_np`` version in plain numpy.  The public name is bound to one of them at
import time according to :data:`autoqsar._accel.USE_NUMBA`.  Both versions are
kept importable so tests and ``benchmarks/bench_kernels.py`` can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, njit

__all__ = [
    "bfs_distances",
    "minmax_kernel",
    "best_split",
    "pls1_nipals",
    "kpls1_nipals",
    "BACKEND",
]


# ---------------------------------------------------------------------------
# all-pairs BFS on a CSR adjacency structure


@njit
def bfs_distances_nb(indptr, indices, n):
    dist = np.full((n, n), -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for src in range(n):
        dist[src, src] = 0
        head = 0
        tail = 1
        queue[0] = src
        while head < tail:
            u = queue[head]
            head += 1
            du = dist[src, u]
            for k in range(indptr[u], indptr[u + 1]):
                v = indices[k]
                if dist[src, v] < 0:
                    dist[src, v] = du + 1
                    queue[tail] = v
                    tail += 1
    return dist


def bfs_distances_np(indptr, indices, n):
    # frontier expansion with a dense adjacency matrix; one step per BFS level
    adj = np.zeros((n, n), dtype=bool)
    for u in range(n):
        adj[u, indices[indptr[u]:indptr[u + 1]]] = True
    dist = np.full((n, n), -1, dtype=np.int64)
    np.fill_diagonal(dist, 0)
    reached = np.eye(n, dtype=bool)
    frontier = reached.copy()
    level = 0
    while frontier.any():
        level += 1
        nxt = (frontier.astype(np.int64) @ adj.astype(np.int64)) > 0
        nxt &= ~reached
        dist[nxt] = level
        reached |= nxt
        frontier = nxt
    return dist


# ---------------------------------------------------------------------------
# min-max (count Tanimoto) similarity between rows of two count matrices


@njit
def minmax_kernel_nb(A, B):
    na, nf = A.shape
    nb = B.shape[0]
    out = np.zeros((na, nb))
    for i in range(na):
        for j in range(nb):
            smin = 0.0
            smax = 0.0
            for k in range(nf):
                a = A[i, k]
                b = B[j, k]
                if a < b:
                    smin += a
                    smax += b
                else:
                    smin += b
                    smax += a
            if smax > 0.0:
                out[i, j] = smin / smax
    return out


def minmax_kernel_np(A, B):
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    out = np.zeros((A.shape[0], B.shape[0]))
    for i in range(A.shape[0]):
        smin = np.minimum(A[i], B).sum(axis=1)
        smax = np.maximum(A[i], B).sum(axis=1)
        nz = smax > 0
        out[i, nz] = smin[nz] / smax[nz]
    return out


# ---------------------------------------------------------------------------
# variance-reduction split search for regression trees


@njit
def best_split_nb(X, y, rows, min_leaf):
    n = rows.shape[0]
    best_feat = -1
    best_thr = 0.0
    best_score = -np.inf
    total = 0.0
    for r in range(n):
        total += y[rows[r]]
    xs = np.empty(n)
    ys = np.empty(n)
    for f in range(X.shape[1]):
        for r in range(n):
            xs[r] = X[rows[r], f]
        order = np.argsort(xs, kind="mergesort")
        for r in range(n):
            ys[r] = y[rows[order[r]]]
        xs_sorted = xs[order]
        left = 0.0
        for k in range(1, n - min_leaf + 1):
            left += ys[k - 1]
            if k < min_leaf:
                continue
            if xs_sorted[k - 1] >= xs_sorted[k]:
                continue
            right = total - left
            score = left * left / k + right * right / (n - k)
            if score > best_score:
                best_score = score
                best_feat = f
                best_thr = 0.5 * (xs_sorted[k - 1] + xs_sorted[k])
    gain = best_score - total * total / n if best_feat >= 0 else 0.0
    return best_feat, best_thr, gain


def best_split_np(X, y, rows, min_leaf):
    n = rows.shape[0]
    yr = y[rows]
    total = 0.0
    for v in yr:
        total += v
    best_feat, best_thr, best_score = -1, 0.0, -np.inf
    k = np.arange(min_leaf, n - min_leaf + 1)
    if k.size == 0:
        return -1, 0.0, 0.0
    for f in range(X.shape[1]):
        xs = X[rows, f]
        order = np.argsort(xs, kind="mergesort")
        xs = xs[order]
        left = np.cumsum(yr[order])[k - 1]
        right = total - left
        score = left * left / k + right * right / (n - k)
        valid = xs[k - 1] < xs[np.minimum(k, n - 1)]
        valid &= k < n
        if not valid.any():
            continue
        score = np.where(valid, score, -np.inf)
        i = int(np.argmax(score))
        if score[i] > best_score:
            best_score = score[i]
            best_feat = f
            best_thr = 0.5 * (xs[k[i] - 1] + xs[k[i]])
    gain = best_score - total * total / n if best_feat >= 0 else 0.0
    return best_feat, best_thr, gain


# ---------------------------------------------------------------------------
# NIPALS for a single response (PLS1)


@njit
def pls1_nipals_nb(X, y, n_comp, tol):
    n, p = X.shape
    X = X.copy()
    y = y.copy()
    W = np.zeros((p, n_comp))
    P = np.zeros((p, n_comp))
    q = np.zeros(n_comp)
    w = np.empty(p)
    t = np.empty(n)
    used = 0
    for a in range(n_comp):
        nw = 0.0
        for j in range(p):
            s = 0.0
            for i in range(n):
                s += X[i, j] * y[i]
            w[j] = s
            nw += s * s
        nw = np.sqrt(nw)
        if nw <= tol:
            break
        tt = 0.0
        for i in range(n):
            s = 0.0
            for j in range(p):
                w_j = w[j] / nw
                s += X[i, j] * w_j
            t[i] = s
            tt += s * s
        if tt <= tol * tol:
            break
        qa = 0.0
        for i in range(n):
            qa += y[i] * t[i]
        qa /= tt
        for j in range(p):
            s = 0.0
            for i in range(n):
                s += X[i, j] * t[i]
            P[j, a] = s / tt
            W[j, a] = w[j] / nw
        q[a] = qa
        for i in range(n):
            for j in range(p):
                X[i, j] -= t[i] * P[j, a]
            y[i] -= qa * t[i]
        used += 1
    return W[:, :used].copy(), P[:, :used].copy(), q[:used].copy()


def pls1_nipals_np(X, y, n_comp, tol):
    X = np.array(X, dtype=np.float64)
    y = np.array(y, dtype=np.float64)
    W, P, q = [], [], []
    for _ in range(n_comp):
        w = X.T @ y
        nw = np.linalg.norm(w)
        if nw <= tol:
            break
        w /= nw
        t = X @ w
        tt = t @ t
        if tt <= tol * tol:
            break
        p = X.T @ t / tt
        qa = (y @ t) / tt
        X -= np.outer(t, p)
        y -= qa * t
        W.append(w)
        P.append(p)
        q.append(qa)
    p_dim = X.shape[1]
    if not W:
        return np.zeros((p_dim, 0)), np.zeros((p_dim, 0)), np.zeros(0)
    return np.column_stack(W), np.column_stack(P), np.array(q)


# ---------------------------------------------------------------------------
# kernel NIPALS for a single response on a centred Gram matrix


@njit
def kpls1_nipals_nb(K, y, n_comp, tol):
    n = K.shape[0]
    K = K.copy()
    y = y.copy()
    T = np.zeros((n, n_comp))
    U = np.zeros((n, n_comp))
    t = np.empty(n)
    Kt = np.empty(n)
    used = 0
    for a in range(n_comp):
        nt = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += K[i, j] * y[j]
            t[i] = s
            nt += s * s
        nt = np.sqrt(nt)
        if nt <= tol:
            break
        for i in range(n):
            t[i] /= nt
        tKt = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += K[i, j] * t[j]
            Kt[i] = s
        for i in range(n):
            tKt += t[i] * Kt[i]
        ty = 0.0
        for i in range(n):
            U[i, a] = y[i]
            T[i, a] = t[i]
            ty += t[i] * y[i]
        # K <- (I - tt')K(I - tt')
        for i in range(n):
            for j in range(n):
                K[i, j] += -t[i] * Kt[j] - Kt[i] * t[j] + tKt * t[i] * t[j]
        for i in range(n):
            y[i] -= ty * t[i]
        used += 1
    return T[:, :used].copy(), U[:, :used].copy()


def kpls1_nipals_np(K, y, n_comp, tol):
    K = np.array(K, dtype=np.float64)
    y = np.array(y, dtype=np.float64)
    T, U = [], []
    for _ in range(n_comp):
        t = K @ y
        nt = np.linalg.norm(t)
        if nt <= tol:
            break
        t /= nt
        Kt = K @ t
        tKt = t @ Kt
        T.append(t)
        U.append(y.copy())
        K += -np.outer(t, Kt) - np.outer(Kt, t) + tKt * np.outer(t, t)
        y -= (t @ y) * t
    n = K.shape[0]
    if not T:
        return np.zeros((n, 0)), np.zeros((n, 0))
    return np.column_stack(T), np.column_stack(U)


if USE_NUMBA:
    BACKEND = "numba"
    bfs_distances = bfs_distances_nb
    minmax_kernel = minmax_kernel_nb
    best_split = best_split_nb
    pls1_nipals = pls1_nipals_nb
    kpls1_nipals = kpls1_nipals_nb
else:
    BACKEND = "numpy"
    bfs_distances = bfs_distances_np
    minmax_kernel = minmax_kernel_np
    best_split = best_split_np
    pls1_nipals = pls1_nipals_np
    kpls1_nipals = kpls1_nipals_np
