"""CART regression tree with variance-reduction splits."""

import numpy as np

from .. import kernels


def grow_tree(X, y, max_depth=8, min_leaf=5):
    """Return flat node arrays ``feature, threshold, left, right, value, n``.

    Leaves have ``feature == -1``; rows with ``x[feature] <= threshold`` go
    left.  A node is split only if both children keep ``min_leaf`` rows.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    feature, threshold, left, right, value, count = [], [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        count.append(len(rows))
        return len(feature) - 1

    root = new_node(np.arange(len(y), dtype=np.int64))
    stack = [(root, np.arange(len(y), dtype=np.int64), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if depth >= max_depth or len(rows) < 2 * min_leaf:
            continue
        yr = y[rows]
        sse = float(((yr - yr.mean()) ** 2).sum())
        if sse <= 1e-24:
            continue
        f, thr, gain = kernels.best_split(X, y, rows, min_leaf)
        if f < 0 or gain <= 1e-12 * sse:
            continue
        go_left = X[rows, f] <= thr
        lrows, rrows = rows[go_left], rows[~go_left]
        li, ri = new_node(lrows), new_node(rrows)
        feature[node], threshold[node], left[node], right[node] = int(f), float(thr), li, ri
        stack.append((ri, rrows, depth + 1))
        stack.append((li, lrows, depth + 1))
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value),
        "n_samples": np.array(count, dtype=np.int64),
    }


def apply_tree(tree, X):
    """Leaf index for each row."""
    feature, threshold = tree["feature"], tree["threshold"]
    left, right = tree["left"], tree["right"]
    out = np.empty(X.shape[0], dtype=np.int64)
    for r in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            node = left[node] if X[r, feature[node]] <= threshold[node] else right[node]
        out[r] = node
    return out


def predict_tree(tree, X):
    return tree["value"][apply_tree(tree, X)]


def depth_of_leaves(tree):
    depths = {0: 0}
    leaves = []
    for node in range(len(tree["feature"])):
        d = depths[node]
        if tree["feature"][node] < 0:
            leaves.append((node, d))
        else:
            depths[int(tree["left"][node])] = d + 1
            depths[int(tree["right"][node])] = d + 1
    return leaves
