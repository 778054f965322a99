"""SMILES parsing and heavy-atom molecular graphs.

Only the organic subset plus bracket atoms are understood.  Stereo marks are
accepted and thrown away, isotopes likewise; everything downstream is 2D.
Explicit ``[H]`` atoms are folded into the implicit hydrogen count of the
atom they are attached to, so :class:`Molecule` is always a heavy-atom graph.
"""

import logging
import re
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property

import networkx as nx
import numpy as np

from . import kernels
from .errors import (
    SmilesSyntaxError,
    UnclosedRingError,
    UnsupportedElementError,
    ValenceError,
)

LOGGER = logging.getLogger(__name__)

SUPPORTED_ELEMENTS = ("B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "H")
HALOGENS = frozenset({"F", "Cl", "Br", "I"})

# standard atomic weights, 3 decimals
ATOMIC_MASS = {
    "H": 1.008, "B": 10.811, "C": 12.011, "N": 14.007, "O": 15.999,
    "F": 18.998, "P": 30.974, "S": 32.065, "Cl": 35.453, "Br": 79.904,
    "I": 126.904,
}
ATOMIC_NUMBER = {
    "H": 1, "B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "P": 15, "S": 16,
    "Cl": 17, "Br": 35, "I": 53,
}
_VALENCES = {
    "H": (1,), "B": (3,), "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5),
    "S": (2, 4, 6), "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,),
}
_ORGANIC = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
_AROMATIC_ORGANIC = ("b", "c", "n", "o", "p", "s")

_BRACKET = re.compile(
    r"\[(?P<isotope>\d+)?"
    r"(?P<element>[A-Z][a-z]?|[a-z]{1,2})"
    r"(?P<chiral>@(?:@|TH[12]|AL[12]|SP[123]|TB\d{1,2}|OH\d{1,2})?)?"
    r"(?P<hcount>H\d?)?"
    r"(?P<charge>[+-]\d+|\++|-+)?"
    r"(?::\d+)?\]"
)


class BondOrder(IntEnum):
    SINGLE = 1
    DOUBLE = 2
    TRIPLE = 3
    AROMATIC = 4

    @property
    def valence(self):
        return 1.5 if self is BondOrder.AROMATIC else float(self.value)

    @property
    def symbol(self):
        return {1: "-", 2: "=", 3: "#", 4: ":"}[self.value]


_BOND_SYMBOLS = {
    "-": BondOrder.SINGLE, "/": BondOrder.SINGLE, "\\": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE, "#": BondOrder.TRIPLE, ":": BondOrder.AROMATIC,
}


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    implicit_h: int = 0
    aromatic: bool = False
    degree: int = 0

    @property
    def symbol(self):
        s = self.element.lower() if self.aromatic else self.element
        if self.formal_charge:
            s += ("+" if self.formal_charge > 0 else "-") * abs(self.formal_charge)
        return s

    @property
    def atomic_number(self):
        return ATOMIC_NUMBER[self.element]


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder

    def other(self, i):
        return self.b if i == self.a else self.a


@dataclass(frozen=True, eq=False)
class Molecule:
    """Heavy-atom molecular graph.

    ``rings`` is the smallest set of smallest rings, each ring an ordered
    atom cycle.  Two molecules compare equal when atoms, bonds and rings match
    in order (same SMILES parsed twice), which is deliberately *not* graph
    isomorphism; use :func:`same_structure` for that.
    """

    atoms: tuple
    bonds: tuple
    rings: tuple
    source_smiles: str = ""

    def __eq__(self, other):
        if not isinstance(other, Molecule):
            return NotImplemented
        return (self.atoms, self.bonds, self.rings) == (other.atoms, other.bonds, other.rings)

    def __hash__(self):
        return hash((self.atoms, self.bonds, self.rings))

    def __len__(self):
        return len(self.atoms)

    @property
    def n_atoms(self):
        return len(self.atoms)

    @cached_property
    def neighbors(self):
        nbrs = [[] for _ in self.atoms]
        for bond in self.bonds:
            nbrs[bond.a].append(bond.b)
            nbrs[bond.b].append(bond.a)
        return tuple(tuple(sorted(n)) for n in nbrs)

    @cached_property
    def bond_lookup(self):
        lookup = {}
        for bond in self.bonds:
            lookup[(bond.a, bond.b)] = bond
            lookup[(bond.b, bond.a)] = bond
        return lookup

    def bond_between(self, i, j):
        return self.bond_lookup.get((i, j))

    @cached_property
    def csr(self):
        indptr = np.zeros(self.n_atoms + 1, dtype=np.int64)
        for i, nb in enumerate(self.neighbors):
            indptr[i + 1] = indptr[i] + len(nb)
        indices = np.array([j for nb in self.neighbors for j in nb], dtype=np.int64)
        return indptr, indices

    @cached_property
    def ring_bonds(self):
        out = set()
        for ring in self.rings:
            for k in range(len(ring)):
                i, j = ring[k], ring[(k + 1) % len(ring)]
                out.add((min(i, j), max(i, j)))
        return frozenset(out)

    @cached_property
    def _distances(self):
        indptr, indices = self.csr
        d = kernels.bfs_distances(indptr, indices, self.n_atoms)
        d.setflags(write=False)
        return d

    def to_networkx(self):
        g = nx.Graph()
        for i, atom in enumerate(self.atoms):
            g.add_node(i, label=f"{atom.symbol}H{atom.implicit_h}")
        for bond in self.bonds:
            g.add_edge(bond.a, bond.b, order=int(bond.order))
        return g

    def kekule_orders(self):
        """Integer bond orders with aromatic bonds resolved to 1/2.

        Raises ValueError when the aromatic system cannot be kekulized.
        """
        orders = {(b.a, b.b): int(b.order) for b in self.bonds}
        arom_bonds = [b for b in self.bonds if b.order is BondOrder.AROMATIC]
        if not arom_bonds:
            return orders
        need = {i for i, a in enumerate(self.atoms) if a.aromatic and _needs_pi(self, i)}
        g = nx.Graph()
        g.add_nodes_from(sorted(need))
        for b in arom_bonds:
            if b.a in need and b.b in need:
                g.add_edge(b.a, b.b)
        matching = nx.max_weight_matching(g, maxcardinality=True)
        if 2 * len(matching) != len(need):
            raise ValueError(f"cannot kekulize {self.source_smiles!r}")
        matched = {(min(i, j), max(i, j)) for i, j in matching}
        for b in arom_bonds:
            orders[(b.a, b.b)] = 2 if (b.a, b.b) in matched else 1
        return orders


def distance_matrix(mol):
    """Topological distance matrix (bond counts) of the heavy-atom graph."""
    return mol._distances


def same_structure(m1, m2):
    """Graph isomorphism on element/charge/H/aromatic labels and bond orders."""
    if len(m1.atoms) != len(m2.atoms) or len(m1.bonds) != len(m2.bonds):
        return False
    return nx.is_isomorphic(
        m1.to_networkx(), m2.to_networkx(),
        node_match=lambda a, b: a["label"] == b["label"],
        edge_match=lambda a, b: a["order"] == b["order"],
    )


def structure_key(mol):
    """Weisfeiler-Lehman hash; equal for isomorphic graphs, rarely for others."""
    return nx.weisfeiler_lehman_graph_hash(
        mol.to_networkx(), node_attr="label", edge_attr="order", iterations=4
    )


# ---------------------------------------------------------------------------
# parsing


class _Builder:
    def __init__(self, smiles):
        self.smiles = smiles
        self.elements = []
        self.charges = []
        self.aromatic = []
        self.hcount = []  # None for organic-subset atoms
        self.positions = []
        self.bonds = {}  # (i, j) -> (order, explicit)

    def add_atom(self, element, charge, aromatic, hcount, pos):
        self.elements.append(element)
        self.charges.append(charge)
        self.aromatic.append(aromatic)
        self.hcount.append(hcount)
        self.positions.append(pos)
        return len(self.elements) - 1

    def add_bond(self, i, j, symbol, pos):
        if i == j:
            raise SmilesSyntaxError("atom bonded to itself", self.smiles, pos)
        key = (min(i, j), max(i, j))
        if key in self.bonds:
            raise SmilesSyntaxError("duplicate bond", self.smiles, pos)
        if symbol is None:
            both_arom = self.aromatic[i] and self.aromatic[j]
            order = BondOrder.AROMATIC if both_arom else BondOrder.SINGLE
            self.bonds[key] = (order, False)
        else:
            self.bonds[key] = (_BOND_SYMBOLS[symbol], True)


def _parse_charge(text):
    if not text:
        return 0
    sign = 1 if text[0] == "+" else -1
    if len(text) > 1 and text[1:].isdigit():
        return sign * int(text[1:])
    return sign * len(text)


def _tokenize(smiles, builder):
    i = 0
    n = len(smiles)
    prev = None
    pending_bond = None
    pending_pos = None
    branch_stack = []
    rings = {}

    def attach(atom_idx, pos):
        nonlocal pending_bond
        if prev is not None:
            builder.add_bond(prev, atom_idx, pending_bond, pos)
        elif pending_bond is not None:
            raise SmilesSyntaxError("bond without preceding atom", smiles, pending_pos)
        pending_bond = None

    while i < n:
        ch = smiles[i]
        if ch == "[":
            end = smiles.find("]", i)
            if end < 0:
                raise SmilesSyntaxError("unterminated bracket atom", smiles, i)
            m = _BRACKET.fullmatch(smiles, i, end + 1)
            if m is None:
                raise SmilesSyntaxError("malformed bracket atom", smiles, i)
            sym = m.group("element")
            aromatic = sym.islower()
            element = sym.capitalize()
            if aromatic and sym not in _AROMATIC_ORGANIC:
                raise UnsupportedElementError(f"unsupported element {sym!r}", smiles, i)
            # other unsupported bracket elements are tolerated until fragment
            # selection, so counter-ions such as [Na+] can be stripped
            h = m.group("hcount")
            hcount = 0 if not h else (int(h[1:]) if len(h) > 1 else 1)
            idx = builder.add_atom(element, _parse_charge(m.group("charge")), aromatic, hcount, i)
            attach(idx, i)
            prev = idx
            i = end + 1
            continue
        if ch.isalpha() or ch == "*":
            sym = None
            for cand in _ORGANIC + _AROMATIC_ORGANIC:
                if smiles.startswith(cand, i):
                    sym = cand
                    break
            if sym is None:
                m = re.match(r"[A-Za-z][a-z]?|\*", smiles[i:])
                raise UnsupportedElementError(f"unsupported element {m.group(0)!r}", smiles, i)
            idx = builder.add_atom(sym.capitalize(), 0, sym.islower(), None, i)
            attach(idx, i)
            prev = idx
            i += len(sym)
            continue
        if ch in _BOND_SYMBOLS:
            if pending_bond is not None:
                raise SmilesSyntaxError("two consecutive bond symbols", smiles, i)
            pending_bond = ch
            pending_pos = i
            i += 1
            continue
        if ch == "(":
            if prev is None:
                raise SmilesSyntaxError("branch without preceding atom", smiles, i)
            if pending_bond is not None:
                raise SmilesSyntaxError("bond symbol before branch", smiles, i)
            branch_stack.append(prev)
            i += 1
            continue
        if ch == ")":
            if not branch_stack:
                raise SmilesSyntaxError("unbalanced ')'", smiles, i)
            if pending_bond is not None:
                raise SmilesSyntaxError("dangling bond symbol", smiles, pending_pos)
            if i > 0 and smiles[i - 1] == "(":
                raise SmilesSyntaxError("empty branch", smiles, i)
            prev = branch_stack.pop()
            i += 1
            continue
        if ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring bond without preceding atom", smiles, i)
            start = i
            if ch == "%":
                label = smiles[i + 1:i + 3]
                if len(label) != 2 or not label.isdigit():
                    raise SmilesSyntaxError("malformed %nn ring label", smiles, i)
                num = int(label)
                i += 3
            else:
                num = int(ch)
                i += 1
            if num in rings:
                other, sym, _ = rings.pop(num)
                if sym is not None and pending_bond is not None and sym != pending_bond:
                    if _BOND_SYMBOLS[sym] != _BOND_SYMBOLS[pending_bond]:
                        raise SmilesSyntaxError("conflicting ring bond orders", smiles, start)
                builder.add_bond(other, prev, sym if sym is not None else pending_bond, start)
            else:
                rings[num] = (prev, pending_bond, start)
            pending_bond = None
            continue
        if ch == ".":
            if pending_bond is not None:
                raise SmilesSyntaxError("dangling bond symbol", smiles, pending_pos)
            if branch_stack:
                raise SmilesSyntaxError("'.' inside a branch", smiles, i)
            prev = None
            i += 1
            continue
        if ch == "@":
            raise SmilesSyntaxError("chirality outside brackets", smiles, i)
        raise SmilesSyntaxError(f"unexpected character {ch!r}", smiles, i)

    if pending_bond is not None:
        raise SmilesSyntaxError("dangling bond symbol", smiles, pending_pos)
    if branch_stack:
        raise SmilesSyntaxError("unclosed branch '('", smiles, n)
    if rings:
        num, (_, _, pos) = min(rings.items(), key=lambda kv: kv[1][2])
        raise UnclosedRingError(f"unclosed ring bond {num}", smiles, pos)
    if not builder.elements:
        raise SmilesSyntaxError("no atoms", smiles, 0)


def _allowed_valences(element, charge):
    base = _VALENCES[element]
    if charge == 0:
        return base
    if element == "C":
        return (3,) if abs(charge) == 1 else ()
    if element == "B":
        return tuple(v - charge for v in base if v - charge >= 0)
    return tuple(v + charge for v in base if v + charge >= 0)


def _needs_pi(mol, i):
    """Whether aromatic atom ``i`` takes part in a ring double bond."""
    atom = mol.atoms[i]
    sigma = 0
    has_double = False
    for j in mol.neighbors[i]:
        order = mol.bond_between(i, j).order
        sigma += 1 if order is BondOrder.AROMATIC else int(order)
        has_double |= order is BondOrder.DOUBLE
    if has_double:
        return False
    used = sigma + atom.implicit_h
    valences = [v for v in _allowed_valences(atom.element, atom.formal_charge) if v >= used]
    return bool(valences) and valences[0] - used >= 1


def _assign_hydrogens(builder):
    """Implicit H for organic atoms; valence checks for every atom."""
    n = len(builder.elements)
    sigma = [0] * n
    has_double = [False] * n
    n_arom_bonds = [0] * n
    for (i, j), (order, _) in builder.bonds.items():
        v = 1 if order is BondOrder.AROMATIC else int(order)
        for k in (i, j):
            sigma[k] += v
            has_double[k] |= order is BondOrder.DOUBLE
            n_arom_bonds[k] += order is BondOrder.AROMATIC
    hs = []
    for k in range(n):
        element = builder.elements[k]
        if element not in _VALENCES:
            hs.append(0)
            continue
        charge = builder.charges[k]
        valences = _allowed_valences(element, charge)
        pos = builder.positions[k]
        if builder.hcount[k] is None:
            pi = 0
            if builder.aromatic[k] and not has_double[k]:
                if element in ("C", "B"):
                    pi = 1
                elif element in ("N", "P") and sigma[k] <= 2:
                    pi = 1
            used = sigma[k] + pi
            fits = [v for v in valences if v >= used]
            if not fits:
                raise ValenceError(
                    f"valence of {element} exceeded ({used} > {max(valences, default=0)})",
                    builder.smiles, pos,
                )
            hs.append(fits[0] - used)
        else:
            used = sigma[k] + builder.hcount[k]
            if not valences or used > max(valences):
                raise ValenceError(
                    f"valence of [{element}] exceeded ({used} > {max(valences, default=0)})",
                    builder.smiles, pos,
                )
            hs.append(builder.hcount[k])
    return hs


def _order_cycle(nodes, adjacency):
    nodes = set(nodes)
    start = min(nodes)
    cycle = [start]
    seen = {start}
    cur = start
    while True:
        nxt = sorted(j for j in adjacency[cur] if j in nodes and j not in seen)
        if not nxt:
            break
        cur = nxt[0]
        cycle.append(cur)
        seen.add(cur)
    # canonical direction: smaller second element
    if len(cycle) > 2 and cycle[-1] < cycle[1]:
        cycle = [cycle[0]] + cycle[1:][::-1]
    return tuple(cycle)


def _sssr(n, bonds):
    if len(bonds) - n + 1 <= 0:
        return ()
    g = nx.Graph()
    g.add_nodes_from(range(n))
    g.add_edges_from(bonds)
    adjacency = {i: set(g[i]) for i in g}
    rings = [_order_cycle(c, adjacency) for c in nx.minimum_cycle_basis(g)]
    return tuple(sorted(rings, key=lambda r: (len(r), sorted(r))))


def _flag_kekule_benzenoids(atoms, bonds, rings):
    """Mark all-carbon 6-rings with alternating single/double bonds aromatic."""
    bond_map = {(b.a, b.b): b for b in bonds}
    changed = True
    while changed:
        changed = False
        for ring in rings:
            if len(ring) != 6 or any(atoms[i].element != "C" for i in ring):
                continue
            edges = [(min(ring[k], ring[(k + 1) % 6]), max(ring[k], ring[(k + 1) % 6])) for k in range(6)]
            orders = [bond_map[e].order for e in edges]
            if all(o is BondOrder.AROMATIC for o in orders):
                continue
            ok = False
            for phase in (0, 1):
                want = [BondOrder.DOUBLE if (k + phase) % 2 == 0 else BondOrder.SINGLE for k in range(6)]
                if all(o is BondOrder.AROMATIC or o is w for o, w in zip(orders, want)):
                    ok = True
                    break
            if not ok:
                continue
            for e in edges:
                bond_map[e] = Bond(e[0], e[1], BondOrder.AROMATIC)
            for i in ring:
                a = atoms[i]
                atoms[i] = Atom(a.element, a.formal_charge, a.implicit_h, True, a.degree)
            changed = True
    return tuple(bond_map[(b.a, b.b)] for b in bonds)


def parse_smiles(text):
    """Parse a SMILES string into a :class:`Molecule`.

    The largest heavy-atom fragment is kept (first one on ties) and a warning
    is logged when anything is dropped.

    Raises
    ------
    SmilesSyntaxError, UnsupportedElementError, ValenceError (including aromatic
    systems with no Kekule structure), UnclosedRingError
    """
    if not isinstance(text, str) or not text.strip():
        raise SmilesSyntaxError("empty SMILES", text or "", 0)
    smiles = text.strip()
    builder = _Builder(smiles)
    _tokenize(smiles, builder)
    hs = _assign_hydrogens(builder)
    n = len(builder.elements)

    # fold explicit hydrogens into their heavy neighbour
    adjacency = [[] for _ in range(n)]
    for i, j in builder.bonds:
        adjacency[i].append(j)
        adjacency[j].append(i)
    is_heavy = [e != "H" for e in builder.elements]
    for k in range(n):
        if not is_heavy[k]:
            heavy_nbrs = [j for j in adjacency[k] if is_heavy[j]]
            if len(heavy_nbrs) == 1:
                hs[heavy_nbrs[0]] += 1 + hs[k]

    # largest heavy-atom fragment
    g = nx.Graph()
    g.add_nodes_from(i for i in range(n) if is_heavy[i])
    g.add_edges_from((i, j) for i, j in builder.bonds if is_heavy[i] and is_heavy[j])
    fragments = sorted((sorted(c) for c in nx.connected_components(g)), key=lambda c: c[0])
    if not fragments:
        raise SmilesSyntaxError("no heavy atoms", smiles, 0)
    keep = max(fragments, key=len)  # max() returns the first maximal one
    if len(fragments) > 1 or len(keep) < n:
        dropped = len(fragments) - 1
        if dropped:
            LOGGER.warning("%r: kept largest fragment (%d heavy atoms), dropped %d other fragment(s)",
                           smiles, len(keep), dropped)

    for old in keep:
        if builder.elements[old] not in _VALENCES:
            raise UnsupportedElementError(
                f"unsupported element {builder.elements[old]!r}", smiles, builder.positions[old]
            )
    remap = {old: new for new, old in enumerate(keep)}
    raw_bonds = []
    for (i, j), (order, explicit) in sorted(builder.bonds.items()):
        if i in remap and j in remap:
            raw_bonds.append((remap[i], remap[j], order, explicit))
    m = len(keep)
    rings = _sssr(m, [(a, b) for a, b, _, _ in raw_bonds])
    ring_edges = set()
    for ring in rings:
        for k in range(len(ring)):
            a, b = ring[k], ring[(k + 1) % len(ring)]
            ring_edges.add((min(a, b), max(a, b)))
    bonds = []
    for a, b, order, explicit in raw_bonds:
        # implicit aromatic-aromatic bond outside any ring (biphenyl) is single
        if order is BondOrder.AROMATIC and not explicit and (a, b) not in ring_edges:
            order = BondOrder.SINGLE
        bonds.append(Bond(a, b, order))
    degree = [0] * m
    for bond in bonds:
        degree[bond.a] += 1
        degree[bond.b] += 1
    atoms = [
        Atom(builder.elements[old], builder.charges[old], hs[old], builder.aromatic[old], degree[remap[old]])
        for old in keep
    ]
    bonds = _flag_kekule_benzenoids(atoms, bonds, rings)
    mol = Molecule(tuple(atoms), tuple(bonds), rings, smiles)
    try:
        mol.kekule_orders()
    except ValueError:
        raise ValenceError("aromatic system cannot be kekulized", smiles) from None
    return mol
