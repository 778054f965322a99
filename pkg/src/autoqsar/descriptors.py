"""Physicochemical and topological 2D descriptors.

A fixed catalog of 26 descriptors computed from the heavy-atom graph.  The
catalog is versioned; the version is written into every run manifest so that
models are never applied to vectors from a different catalog.
"""

import csv
import io
import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import ConfigError
from .molgraph import ATOMIC_MASS, HALOGENS, BondOrder, distance_matrix

CATALOG_VERSION = "surrogate-2d-1.0"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    definition: str
    units: str


CATALOG = (
    CatalogEntry("mol_weight", "sum of standard atomic weights incl. implicit H", "g/mol"),
    CatalogEntry("heavy_atoms", "number of non-hydrogen atoms", "count"),
    CatalogEntry("n_carbon", "number of carbon atoms", "count"),
    CatalogEntry("n_nitrogen", "number of nitrogen atoms", "count"),
    CatalogEntry("n_oxygen", "number of oxygen atoms", "count"),
    CatalogEntry("n_sulfur", "number of sulfur atoms", "count"),
    CatalogEntry("n_halogen", "number of F, Cl, Br, I atoms", "count"),
    CatalogEntry("n_rings", "size of the smallest set of smallest rings", "count"),
    CatalogEntry("n_aromatic_rings", "SSSR rings whose atoms are all aromatic", "count"),
    CatalogEntry("hbond_donors", "N and O atoms bearing at least one hydrogen", "count"),
    CatalogEntry("hbond_acceptors", "N and O atoms", "count"),
    CatalogEntry("rotatable_bonds", "acyclic single bonds between non-terminal heavy atoms", "count"),
    CatalogEntry("wiener", "sum of topological distances over unordered atom pairs", "bonds"),
    CatalogEntry("zagreb_m1", "sum over atoms of degree squared", "dimensionless"),
    CatalogEntry("zagreb_m2", "sum over bonds of the product of end-atom degrees", "dimensionless"),
    CatalogEntry("balaban_j", "m/(mu+1) * sum over bonds of (s_i*s_j)^-1/2, s = distance sum", "dimensionless"),
    CatalogEntry("chi0", "Randic order-0 connectivity, sum of degree^-1/2 (isolated atom = 1)", "dimensionless"),
    CatalogEntry("chi1", "Randic order-1 connectivity, sum over bonds of (d_i*d_j)^-1/2", "dimensionless"),
    CatalogEntry("kappa1", "Kier shape index A(A-1)^2/P1^2", "dimensionless"),
    CatalogEntry("kappa2", "Kier shape index (A-1)(A-2)^2/P2^2", "dimensionless"),
    CatalogEntry("kappa3", "Kier shape index, odd/even A forms over P3^2", "dimensionless"),
    CatalogEntry("radius", "minimum atom eccentricity", "bonds"),
    CatalogEntry("diameter", "maximum atom eccentricity", "bonds"),
    CatalogEntry("eccentric_connectivity", "sum over atoms of degree times eccentricity", "bonds"),
    CatalogEntry("logp_contrib", "atom-contribution octanol/water logP estimate", "log units"),
    CatalogEntry("tpsa_contrib", "atom-contribution topological polar surface area", "A^2"),
)
DESCRIPTOR_NAMES = tuple(e.name for e in CATALOG)


@dataclass(frozen=True, eq=False)
class DescriptorVector:
    values: np.ndarray
    names: tuple = DESCRIPTOR_NAMES
    source_id: str = ""

    def __getitem__(self, name):
        return float(self.values[self.names.index(name)])

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))


@lru_cache(maxsize=1)
def contribution_tables():
    text = resources.files("autoqsar.data").joinpath("atom_contributions.json").read_text()
    return json.loads(text)


def atom_class(mol, i):
    atom = mol.atoms[i]
    sym = atom.element.lower() if atom.aromatic else atom.element
    unsat = any(
        mol.bond_between(i, j).order in (BondOrder.DOUBLE, BondOrder.TRIPLE)
        for j in mol.neighbors[i]
    )
    return sym, f"{sym}{'=' if unsat else ''}H{atom.implicit_h}"


def _lookup(table, sym, key):
    if key in table:
        return table[key]
    return table.get(sym, table.get(sym.capitalize(), 0.0))


def _path3_count(degree, mol):
    # walks a-i-j-b over each bond i-j, minus those closing a triangle (a == b)
    total = 0
    for bond in mol.bonds:
        common = len(set(mol.neighbors[bond.a]) & set(mol.neighbors[bond.b]))
        total += (degree[bond.a] - 1) * (degree[bond.b] - 1) - common
    return total


def _kappa(num, den):
    return num / den if den else 0.0


def compute_descriptors(mol, source_id=""):
    """Full catalog vector for one molecule, in :data:`CATALOG` order."""
    n = mol.n_atoms
    atoms = mol.atoms
    degree = np.array([a.degree for a in atoms], dtype=np.int64)
    dist = distance_matrix(mol)
    m = len(mol.bonds)

    mw = sum(ATOMIC_MASS[a.element] + a.implicit_h * ATOMIC_MASS["H"] for a in atoms)
    count = lambda *els: sum(1 for a in atoms if a.element in els)  # noqa: E731
    aromatic_rings = sum(1 for r in mol.rings if all(atoms[i].aromatic for i in r))
    donors = sum(1 for a in atoms if a.element in ("N", "O") and a.implicit_h > 0)
    rotatable = sum(
        1 for b in mol.bonds
        if b.order is BondOrder.SINGLE
        and (b.a, b.b) not in mol.ring_bonds
        and degree[b.a] > 1 and degree[b.b] > 1
    )

    wiener = int(dist.sum()) // 2
    m1 = int((degree ** 2).sum())
    m2 = int(sum(degree[b.a] * degree[b.b] for b in mol.bonds))

    dsum = dist.sum(axis=1).astype(float)
    if m > 0:
        mu = m - n + 1
        balaban = m / (mu + 1) * sum(1.0 / np.sqrt(dsum[b.a] * dsum[b.b]) for b in mol.bonds)
    else:
        balaban = 0.0

    chi0 = float(sum(1.0 if d == 0 else d ** -0.5 for d in degree))
    chi1 = float(sum((degree[b.a] * degree[b.b]) ** -0.5 for b in mol.bonds))

    A = n
    p1 = m
    p2 = int(sum(d * (d - 1) // 2 for d in degree))
    p3 = _path3_count(degree, mol)
    k1 = _kappa(A * (A - 1) ** 2, p1 ** 2)
    k2 = _kappa((A - 1) * (A - 2) ** 2, p2 ** 2)
    if A % 2:
        k3 = _kappa((A - 1) * (A - 3) ** 2, p3 ** 2)
    else:
        k3 = _kappa((A - 3) * (A - 2) ** 2, p3 ** 2)

    ecc = dist.max(axis=1)
    radius = int(ecc.min())
    diameter = int(ecc.max())
    ecc_conn = int((degree * ecc).sum())

    tables = contribution_tables()
    logp = 0.0
    tpsa = 0.0
    for i, a in enumerate(atoms):
        sym, key = atom_class(mol, i)
        logp += _lookup(tables["logp"], sym, key)
        logp += tables["charge_logp_penalty"] * abs(a.formal_charge)
        tpsa += _lookup(tables["tpsa"], sym, key)

    values = np.array([
        mw, n, count("C"), count("N"), count("O"), count("S"),
        sum(1 for a in atoms if a.element in HALOGENS),
        len(mol.rings), aromatic_rings, donors, count("N", "O"), rotatable,
        wiener, m1, m2, balaban, chi0, chi1, k1, k2, k3,
        radius, diameter, ecc_conn, logp, tpsa,
    ], dtype=np.float64)
    return DescriptorVector(values, DESCRIPTOR_NAMES, source_id)


def descriptor_matrix(mols):
    if not mols:
        return np.zeros((0, len(CATALOG)))
    return np.vstack([compute_descriptors(m).values for m in mols])


def correlation_filter(X, max_r=0.99):
    """Greedy pair-correlation filter in catalog order.

    A column is dropped when it has zero variance or when its absolute
    Pearson correlation with an already retained column exceeds ``max_r``.
    Returns the retained column indices as a sorted int array.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3:
        raise ConfigError("correlation_filter needs a 2D matrix with at least 3 rows")
    if not 0.0 < max_r <= 1.0:
        raise ConfigError(f"max_r must be in (0, 1], got {max_r}")
    centered = X - X.mean(axis=0)
    norms = np.sqrt((centered ** 2).sum(axis=0))
    nonconstant = np.ptp(X, axis=0) > 0
    if not nonconstant.any():
        raise ConfigError("all descriptor columns are constant")
    keep = []
    for j in range(X.shape[1]):
        if not nonconstant[j]:
            continue
        col = centered[:, j] / norms[j]
        if keep:
            r = np.abs(col @ (centered[:, keep] / norms[keep]))
            if (r > max_r).any():
                continue
        keep.append(j)
    return np.array(keep, dtype=np.int64)


def catalog_csv():
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "definition", "units"])
    for e in CATALOG:
        writer.writerow([e.name, e.definition, e.units])
    return buf.getvalue()
