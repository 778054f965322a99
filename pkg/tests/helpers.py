"""Independent oracles and random-structure generators used across the tests.

Nothing here calls into the package's own graph algorithms: distances come
from Floyd-Warshall, paths from networkx enumeration, regressions from the
normal equations.
"""

import itertools

import networkx as nx
import numpy as np

from autoqsar._hashing import hash_str

MAX_DEGREE = {"C": 4, "N": 3, "O": 2}


def random_graph(rng, n_atoms, extra_edges=0, hetero=True):
    """Random connected heavy-atom graph with single bonds and valence limits.

    Returns ``(elements, edges)`` with ``edges`` a sorted list of (i, j), i < j.
    """
    elements = ["C"]
    edges = set()
    degree = [0]
    for k in range(1, n_atoms):
        u = rng.random()
        el = "O" if hetero and u < 0.12 else ("N" if hetero and u < 0.24 else "C")
        open_sites = [i for i in range(k) if degree[i] < MAX_DEGREE[elements[i]]]
        parent = open_sites[int(rng.integers(len(open_sites)))]
        elements.append(el)
        degree.append(1)
        degree[parent] += 1
        edges.add((parent, k))
    for _ in range(extra_edges):
        cands = [
            (i, j) for i, j in itertools.combinations(range(n_atoms), 2)
            if (i, j) not in edges
            and degree[i] < MAX_DEGREE[elements[i]] and degree[j] < MAX_DEGREE[elements[j]]
        ]
        if not cands:
            break
        i, j = cands[int(rng.integers(len(cands)))]
        edges.add((i, j))
        degree[i] += 1
        degree[j] += 1
    return elements, sorted(edges)


def graph_smiles(elements, edges):
    """SMILES for a single-bonded graph: DFS tree plus ring-closure labels."""
    n = len(elements)
    adj = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    order, parent, children = [], {0: None}, {i: [] for i in range(n)}
    stack = [0]
    seen = set()
    while stack:
        u = stack.pop()
        if u in seen:
            continue
        seen.add(u)
        order.append(u)
        if parent[u] is not None:
            children[parent[u]].append(u)
        for v in sorted(adj[u], reverse=True):
            if v not in seen:
                parent[v] = u
                stack.append(v)
    tree = {(min(u, p), max(u, p)) for u, p in parent.items() if p is not None}
    closures = [e for e in edges if e not in tree]
    labels = {i: [] for i in range(n)}
    for k, (i, j) in enumerate(closures, start=1):
        tag = str(k) if k < 10 else f"%{k}"
        labels[i].append(tag)
        labels[j].append(tag)

    def emit(u):
        out = elements[u] + "".join(labels[u])
        kids = children[u]
        for c in kids[:-1]:
            out += "(" + emit(c) + ")"
        if kids:
            out += emit(kids[-1])
        return out

    return emit(0)


def floyd_warshall(n, edges):
    inf = 10 ** 9
    d = [[0 if i == j else inf for j in range(n)] for i in range(n)]
    for i, j in edges:
        d[i][j] = d[j][i] = 1
    for k in range(n):
        for i in range(n):
            dik = d[i][k]
            for j in range(n):
                if dik + d[k][j] < d[i][j]:
                    d[i][j] = dik + d[k][j]
    return np.array(d, dtype=np.int64)


def mol_edges(mol):
    return [(b.a, b.b) for b in mol.bonds]


def topological_oracle(mol):
    """Wiener, radius, diameter, eccentric connectivity from Floyd-Warshall."""
    n = mol.n_atoms
    d = floyd_warshall(n, mol_edges(mol))
    deg = [sum(1 for e in mol_edges(mol) if i in e) for i in range(n)]
    ecc = [max(row) for row in d.tolist()]
    return {
        "wiener": sum(d[i][j] for i in range(n) for j in range(i + 1, n)),
        "radius": min(ecc),
        "diameter": max(ecc),
        "eccentric_connectivity": sum(dg * e for dg, e in zip(deg, ecc)),
    }


def count_paths(n, edges, length):
    """Number of simple paths with exactly ``length`` bonds (undirected, counted once)."""
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(edges)
    total = 0
    for s, t in itertools.combinations(range(n), 2):
        total += sum(1 for p in nx.all_simple_paths(g, s, t, cutoff=length) if len(p) - 1 == length)
    return total


def connectivity_oracle(mol):
    """Zagreb M1/M2, Randic chi0/chi1 and Kier kappa1-3 by brute force."""
    n = mol.n_atoms
    edges = mol_edges(mol)
    deg = [0] * n
    for i, j in edges:
        deg[i] += 1
        deg[j] += 1
    p1, p2, p3 = (count_paths(n, edges, k) for k in (1, 2, 3))
    A = n

    def safe(num, den):
        return num / den if den else 0.0

    k3 = safe((A - 1) * (A - 3) ** 2, p3 ** 2) if A % 2 else safe((A - 3) * (A - 2) ** 2, p3 ** 2)
    return {
        "zagreb_m1": sum(d * d for d in deg),
        "zagreb_m2": sum(deg[i] * deg[j] for i, j in edges),
        "chi0": sum(1.0 if d == 0 else 1 / np.sqrt(d) for d in deg),
        "chi1": sum(1 / np.sqrt(deg[i] * deg[j]) for i, j in edges),
        "kappa1": safe(A * (A - 1) ** 2, p1 ** 2),
        "kappa2": safe((A - 1) * (A - 2) ** 2, p2 ** 2),
        "kappa3": k3,
    }


def _oracle_path_string(mol, path):
    s = mol.atoms[path[0]].symbol
    for a, b in zip(path, path[1:]):
        s += mol.bond_between(a, b).order.symbol + mol.atoms[b].symbol
    return s


def linear_oracle(mol, max_bonds):
    """Feature-count map of the linear scheme by exhaustive networkx enumeration."""
    g = mol.to_networkx()
    feats = {}

    def add(path):
        s = min(_oracle_path_string(mol, path), _oracle_path_string(mol, path[::-1]))
        key = hash_str("L" + s)
        feats[key] = feats.get(key, 0) + 1

    for i in range(mol.n_atoms):
        add([i])
    for s, t in itertools.combinations(range(mol.n_atoms), 2):
        for p in nx.all_simple_paths(g, s, t, cutoff=max_bonds):
            add(p)
    return feats


def ols_predictions(X_train, y_train, X_test):
    """Least squares with intercept via the normal equations."""
    A = np.column_stack([np.ones(len(X_train)), X_train])
    beta = np.linalg.solve(A.T @ A, A.T @ y_train)
    return np.column_stack([np.ones(len(X_test)), X_test]) @ beta
