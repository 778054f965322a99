import numpy as np


def _fit_terms(Z, y, terms):
    D = np.column_stack([np.ones(len(y)), Z[:, terms]]) if terms else np.ones((len(y), 1))
    if np.linalg.matrix_rank(D) < D.shape[1]:
        return None
    beta, *_ = np.linalg.lstsq(D, y, rcond=None)
    return beta


def adjusted_r2(r2, n, k):
    if n - k - 1 <= 0:
        return -np.inf
    return 1.0 - (1.0 - r2) * (n - 1) / (n - k - 1)


def forward_stepwise(Z, y, max_terms):
    """Greedy forward selection on adjusted R^2.

    Returns ``(terms, intercept, coefficients)`` with coefficients aligned to
    ``terms``.  Candidates that make the design rank deficient are skipped.
    """
    n = len(y)
    sst = float(((y - y.mean()) ** 2).sum())
    terms = []
    current = 0.0  # intercept-only model: R^2 = 0
    while len(terms) < max_terms:
        best_j, best_adj = None, current
        for j in range(Z.shape[1]):
            if j in terms:
                continue
            beta = _fit_terms(Z, y, terms + [j])
            if beta is None:
                continue
            D = np.column_stack([np.ones(n), Z[:, terms + [j]]])
            r2 = 1.0 - float(((y - D @ beta) ** 2).sum()) / sst
            adj = adjusted_r2(r2, n, len(terms) + 1)
            if adj > best_adj + 1e-12:
                best_j, best_adj = j, adj
        if best_j is None:
            break
        terms.append(best_j)
        current = best_adj
    beta = _fit_terms(Z, y, terms)
    return terms, float(beta[0]), np.asarray(beta[1:])
