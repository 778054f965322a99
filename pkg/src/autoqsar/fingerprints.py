"""Sparse count fingerprints: radial, linear, dendritic and molprint2d.

All keys are 64-bit integers from :mod:`autoqsar._hashing`, so feature keys
are identical across processes and platforms.

* radial    - circular atom environments (ECFP-like), iterated neighbour
              hashing; an environment covering the same atom set as an
              earlier one is dropped.
* linear    - every simple path of up to ``params`` bonds, written as an
              atom/bond symbol string in its lexicographically smaller
              direction.
* dendritic - the linear features plus, at every branch atom, each pair of
              rooted paths (up to 3 bonds) leaving through different
              neighbours.
* molprint2d - one feature per atom: its sorted (distance, atom type) list
              for all atoms within ``params`` bonds.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._hashing import hash_ints, hash_str
from .errors import ConfigError, FeatureMismatchError
from .molgraph import distance_matrix

SCHEMES = ("radial", "linear", "dendritic", "molprint2d")
DEFAULT_PARAMS = {"radial": 3, "linear": 7, "dendritic": 7, "molprint2d": 2}
PARAM_RANGE = {"radial": (0, 3), "molprint2d": (0, 3), "linear": (1, 7), "dendritic": (1, 7)}
FOLD_BITS = 2048
BRANCH_PATH_MAX = 3


@dataclass(frozen=True, eq=False)
class Fingerprint:
    scheme: str
    features: dict = field(repr=False)
    params: int = 0

    def __eq__(self, other):
        if not isinstance(other, Fingerprint):
            return NotImplemented
        return (self.scheme, self.params, self.features) == (other.scheme, other.params, other.features)

    def __len__(self):
        return len(self.features)

    def to_json(self):
        return {
            "scheme": self.scheme,
            "params": self.params,
            "features": [[str(k), v] for k, v in sorted(self.features.items())],
        }

    @classmethod
    def from_json(cls, obj):
        feats = {int(k): int(v) for k, v in obj["features"]}
        return cls(obj["scheme"], feats, int(obj["params"]))


def check_params(scheme, params):
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown fingerprint scheme {scheme!r}; expected one of {SCHEMES}")
    if params is None:
        return DEFAULT_PARAMS[scheme]
    lo, hi = PARAM_RANGE[scheme]
    if not isinstance(params, (int, np.integer)) or not lo <= params <= hi:
        raise ConfigError(f"{scheme} parameter must be an integer in [{lo}, {hi}], got {params!r}")
    return int(params)


def fingerprint(mol, scheme="radial", params=None):
    params = check_params(scheme, params)
    if scheme == "radial":
        feats = _radial(mol, params)
    elif scheme == "linear":
        feats = _linear(mol, params)
    elif scheme == "dendritic":
        feats = _linear(mol, params)
        for key, c in _branches(mol, min(params, BRANCH_PATH_MAX)).items():
            feats[key] = feats.get(key, 0) + c
    else:
        feats = _molprint2d(mol, params)
    return Fingerprint(scheme, feats, params)


# ---------------------------------------------------------------------------


def _atom_invariant(atom):
    return hash_ints((atom.atomic_number, atom.degree, atom.formal_charge,
                      atom.implicit_h, int(atom.aromatic)))


def _radial(mol, radius):
    dist = distance_matrix(mol)
    n = mol.n_atoms
    ids = [_atom_invariant(a) for a in mol.atoms]
    feats = {}
    seen = set()

    def emit(r, ids):
        by_set = {}
        for i in range(n):
            env = frozenset(np.flatnonzero(dist[i] <= r).tolist())
            if env in seen:
                continue
            # two centres covering the same atoms at this radius: keep the smaller key
            if env not in by_set or ids[i] < by_set[env]:
                by_set[env] = ids[i]
        for env, key in by_set.items():
            seen.add(env)
            feats[key] = feats.get(key, 0) + 1

    emit(0, ids)
    for r in range(1, radius + 1):
        new = []
        for i in range(n):
            nb = sorted((int(mol.bond_between(i, j).order), ids[j]) for j in mol.neighbors[i])
            new.append(hash_ints((r, ids[i], *[x for pair in nb for x in pair])))
        ids = new
        emit(r, ids)
    return feats


def _path_string(mol, path):
    parts = [mol.atoms[path[0]].symbol]
    for a, b in zip(path, path[1:]):
        parts.append(mol.bond_between(a, b).order.symbol)
        parts.append(mol.atoms[b].symbol)
    return "".join(parts)


def canonical_path_string(mol, path):
    fwd = _path_string(mol, path)
    rev = _path_string(mol, path[::-1])
    return min(fwd, rev)


def _simple_paths_from(mol, start, max_bonds):
    stack = [(start,)]
    while stack:
        path = stack.pop()
        yield path
        if len(path) - 1 >= max_bonds:
            continue
        for j in mol.neighbors[path[-1]]:
            if j not in path:
                stack.append(path + (j,))


def _linear(mol, max_bonds):
    feats = {}
    for start in range(mol.n_atoms):
        for path in _simple_paths_from(mol, start, max_bonds):
            if len(path) > 1 and path[0] > path[-1]:
                continue  # every undirected path once
            key = hash_str("L" + canonical_path_string(mol, path))
            feats[key] = feats.get(key, 0) + 1
    return feats


def _branches(mol, max_bonds):
    feats = {}
    for root, atom in enumerate(mol.atoms):
        if atom.degree < 3:
            continue
        rooted = [
            p for p in _simple_paths_from(mol, root, max_bonds) if len(p) > 1
        ]
        labels = [_path_string(mol, p) for p in rooted]
        for a in range(len(rooted)):
            for b in range(a + 1, len(rooted)):
                pa, pb = rooted[a], rooted[b]
                if pa[1] == pb[1] or set(pa[1:]) & set(pb[1:]):
                    continue
                la, lb = sorted((labels[a], labels[b]))
                key = hash_str(f"D{la}|{lb}")
                feats[key] = feats.get(key, 0) + 1
    return feats


def _molprint2d(mol, radius):
    dist = distance_matrix(mol)
    types = [f"{a.symbol}.{a.degree}.{a.implicit_h}" for a in mol.atoms]
    feats = {}
    for i in range(mol.n_atoms):
        items = sorted(
            (int(dist[i, j]), types[j]) for j in range(mol.n_atoms) if dist[i, j] <= radius
        )
        key = hash_str("M" + ";".join(f"{d}:{t}" for d, t in items))
        feats[key] = feats.get(key, 0) + 1
    return feats


# ---------------------------------------------------------------------------
# similarity


def tanimoto(a, b):
    """Min-max similarity of two count fingerprints (classic Tanimoto on bits)."""
    if a.scheme != b.scheme or a.params != b.params:
        raise FeatureMismatchError(
            f"cannot compare {a.scheme}/{a.params} with {b.scheme}/{b.params}"
        )
    fa, fb = a.features, b.features
    smin = 0
    smax = 0
    for k in fa.keys() | fb.keys():
        x = fa.get(k, 0)
        y = fb.get(k, 0)
        smin += min(x, y)
        smax += max(x, y)
    return smin / smax if smax else 0.0


def count_matrix(fps, vocabulary=None):
    """Dense float count matrix over ``vocabulary`` (sorted union by default)."""
    if vocabulary is None:
        vocabulary = sorted(set().union(*(fp.features for fp in fps))) if fps else []
    index = {k: i for i, k in enumerate(vocabulary)}
    M = np.zeros((len(fps), len(vocabulary)))
    for r, fp in enumerate(fps):
        for k, c in fp.features.items():
            j = index.get(k)
            if j is not None:
                M[r, j] = c
    return M


def _check_uniform(fps):
    kinds = {(fp.scheme, fp.params) for fp in fps}
    if len(kinds) > 1:
        raise FeatureMismatchError(f"mixed fingerprint kinds {sorted(kinds)}")
    return kinds.pop() if kinds else None


def tanimoto_kernel(fps_a, fps_b=None):
    """Min-max kernel matrix between two fingerprint lists."""
    symmetric = fps_b is None
    if symmetric:
        fps_b = fps_a
    kinds = {_check_uniform(fps_a), _check_uniform(fps_b)} - {None}
    if len(kinds) > 1:
        raise FeatureMismatchError(f"mixed fingerprint kinds {sorted(kinds)}")
    vocab = sorted(set().union(*(fp.features for fp in list(fps_a) + list(fps_b))))
    A = count_matrix(fps_a, vocab)
    B = A if symmetric else count_matrix(fps_b, vocab)
    K = kernels.minmax_kernel(A, B)
    if symmetric:
        # the kernel is symmetric by construction; enforce bitwise symmetry
        K = np.triu(K) + np.triu(K, 1).T
    return K


def fold(fp, n_bits=FOLD_BITS):
    bits = np.zeros(n_bits, dtype=bool)
    for k in fp.features:
        bits[k % n_bits] = True
    return bits
