"""Seeded synthetic learning sets with a known descriptor signal.

Molecules are random acyclic alkane/ether/amine skeletons: a tree of C, O
and N atoms grown one atom at a time with valence limits, written out as
SMILES.  Activities are a linear combination of standardized catalog
descriptors plus Gaussian noise, so a working pipeline must recover them.
"""

import csv

import numpy as np

from .dataset import Dataset, Record
from .descriptors import DESCRIPTOR_NAMES, descriptor_matrix
from .molgraph import parse_smiles, same_structure, structure_key

MAX_DEGREE = {"C": 4, "N": 3, "O": 2}
SIGNAL_DESCRIPTORS = ("n_oxygen", "n_nitrogen", "kappa2")
SIGNAL_WEIGHTS = (0.8, 0.6, 0.5)


def random_skeleton(rng, n_atoms, p_oxygen=0.15, p_nitrogen=0.12):
    elements = ["C"]
    children = [[]]
    degree = [0]
    while len(elements) < n_atoms:
        u = rng.random()
        el = "O" if u < p_oxygen else ("N" if u < p_oxygen + p_nitrogen else "C")
        open_sites = [i for i, e in enumerate(elements) if degree[i] < MAX_DEGREE[e]]
        # avoid O-O and N-N-ish peroxide/hydrazine bonds
        if el != "C":
            open_sites = [i for i in open_sites if elements[i] == "C"] or open_sites
        parent = open_sites[int(rng.integers(len(open_sites)))]
        elements.append(el)
        children.append([])
        degree.append(1)
        degree[parent] += 1
        children[parent].append(len(elements) - 1)
    return elements, children


def skeleton_smiles(elements, children, root=0):
    kids = children[root]
    out = elements[root]
    for k in kids[:-1]:
        out += "(" + skeleton_smiles(elements, children, k) + ")"
    if kids:
        out += skeleton_smiles(elements, children, kids[-1])
    return out


def unique_molecules(n, seed=0, min_atoms=4, max_atoms=14):
    """``n`` structurally distinct random skeletons as (smiles, Molecule) pairs."""
    rng = np.random.default_rng(seed)
    found = []
    buckets = {}
    attempts = 0
    while len(found) < n:
        attempts += 1
        if attempts > 200 * n:
            raise RuntimeError("could not generate enough distinct molecules")
        size = int(rng.integers(min_atoms, max_atoms + 1))
        smi = skeleton_smiles(*random_skeleton(rng, size))
        mol = parse_smiles(smi)
        key = structure_key(mol)
        if any(same_structure(mol, other) for other in buckets.get(key, [])):
            continue
        buckets.setdefault(key, []).append(mol)
        found.append((smi, mol))
    return found


def synthetic_dataset(n=200, seed=0, noise=0.2, descriptors=SIGNAL_DESCRIPTORS,
                      weights=SIGNAL_WEIGHTS, offset=6.0):
    """Dataset whose activity is ``offset + sum(w * z(descriptor)) + N(0, noise)``."""
    pairs = unique_molecules(n, seed)
    mols = tuple(m for _, m in pairs)
    D = descriptor_matrix(mols)
    cols = [DESCRIPTOR_NAMES.index(d) for d in descriptors]
    Z = (D[:, cols] - D[:, cols].mean(axis=0)) / D[:, cols].std(axis=0)
    rng = np.random.default_rng(seed + 1)
    y = offset + Z @ np.asarray(weights) + rng.normal(0.0, noise, size=n)
    records = tuple(
        Record(f"mol{i:04d}", smi, float(a), (i + 2,)) for i, ((smi, _), a) in enumerate(zip(pairs, y))
    )
    return Dataset(records, f"synthetic(n={n}, seed={seed})", mols)


def write_csv(ds, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "smiles", "activity"])
        for r in ds.records:
            w.writerow([r.id, r.smiles, repr(r.activity)])
