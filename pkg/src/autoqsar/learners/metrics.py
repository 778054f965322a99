import numpy as np

from ..errors import UndefinedMetricError


def coefficient_of_determination(y_true, y_pred, reference_mean):
    """1 - SSE / SST with SST taken about ``reference_mean``."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.size == 0 or y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must be nonempty and of equal length")
    sst = float(((y_true - reference_mean) ** 2).sum())
    if sst == 0.0:
        raise UndefinedMetricError("r2/q2 undefined: targets have zero spread about the reference mean")
    sse = float(((y_true - y_pred) ** 2).sum())
    return 1.0 - sse / sst


def metrics(y_true, y_pred, y_train_mean):
    """r2 (pass the training targets) or q2 (pass test targets); both use the training mean."""
    return coefficient_of_determination(y_true, y_pred, y_train_mean)


def r2_train(y_train, y_fit):
    y_train = np.asarray(y_train, dtype=np.float64)
    return coefficient_of_determination(y_train, y_fit, y_train.mean())


def q2_test(y_test, y_pred, y_train_mean):
    return coefficient_of_determination(y_test, y_pred, y_train_mean)


def balanced_accuracy(labels, predicted):
    labels = np.asarray(labels).astype(bool)
    predicted = np.asarray(predicted).astype(bool)
    recalls = []
    for cls in (False, True):
        mask = labels == cls
        if mask.any():
            recalls.append(float((predicted[mask] == cls).mean()))
    if not recalls:
        raise UndefinedMetricError("balanced accuracy of an empty set")
    return float(np.mean(recalls))
