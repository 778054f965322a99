"""Time every hot kernel on its numba and numpy implementations.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Inputs are sized like a typical run: a 200-molecule learning set, ~150
training rows, 26 descriptor columns, a few thousand fingerprint keys.
The first numba call (compilation or cache load) is excluded from timing.
"""

import argparse
import json
import timeit

import numpy as np

from autoqsar import kernels
from autoqsar.molgraph import parse_smiles


def _inputs(rng):
    mol = parse_smiles("CC(C)Cc1ccc(cc1)C(C)C(=O)NCCOc1ccc2ccccc2c1CCN(C)C")
    indptr = np.zeros(mol.n_atoms + 1, dtype=np.int64)
    for i, nb in enumerate(mol.neighbors):
        indptr[i + 1] = indptr[i] + len(nb)
    indices = np.array([j for nb in mol.neighbors for j in nb], dtype=np.int64)

    counts = rng.poisson(0.05, size=(200, 3000)).astype(np.float64)
    X = rng.normal(size=(150, 26))
    y = X[:, :3] @ [0.8, 0.6, 0.5] + 0.2 * rng.normal(size=150)
    Xc, yc = X - X.mean(0), y - y.mean()
    K = np.exp(-0.05 * ((X[:, None] - X[None]) ** 2).sum(-1))
    J = np.eye(150) - 1.0 / 150
    Kc = J @ K @ J
    rows = np.arange(150, dtype=np.int64)
    return {
        "bfs_distances": (indptr, indices, mol.n_atoms),
        "minmax_kernel": (counts, counts),
        "best_split": (X, y, rows, 5),
        "pls1_nipals": (Xc, yc, 10, 1e-10),
        "kpls1_nipals": (Kc, yc, 10, 1e-10),
    }


def bench(repeat):
    rng = np.random.default_rng(0)
    results = {}
    for name, args in _inputs(rng).items():
        nb = getattr(kernels, f"{name}_nb")
        npy = getattr(kernels, f"{name}_np")
        nb(*args)  # compile / load cache
        row = {}
        for label, fn in (("numba", nb), ("numpy", npy)):
            number = 1
            while timeit.timeit(lambda: fn(*args), number=number) < 0.2:
                number *= 2
            best = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number
            row[label] = best
        row["speedup"] = row["numpy"] / row["numba"]
        results[name] = row
    return results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write results to this file")
    args = ap.parse_args()
    results = bench(args.repeat)
    print(f"default backend: {kernels.BACKEND}")
    print(f"{'kernel':<15} {'numba (ms)':>11} {'numpy (ms)':>11} {'speedup':>8}")
    for name, r in results.items():
        print(f"{name:<15} {r['numba'] * 1e3:11.3f} {r['numpy'] * 1e3:11.3f} {r['speedup']:8.1f}x")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=1)


if __name__ == "__main__":
    main()
