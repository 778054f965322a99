"""Learning-set ingestion, curation and randomized stratified splitting."""

import csv
import hashlib
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ._hashing import derive_seed
from .errors import ConfigError, DataError, DuplicateConflictError, SmilesError
from .molgraph import parse_smiles, same_structure, structure_key

MIN_RECORDS = 12
DUPLICATE_TOLERANCE = 0.2
ACTIVITY_TRANSFORMS = ("none", "ic50-nm", "ic50-um")
FRACTION_RANGE = (0.5, 0.95)


@dataclass(frozen=True)
class Record:
    id: str
    smiles: str
    activity: float
    rows: tuple = ()


@dataclass(frozen=True, eq=False)
class Dataset:
    records: tuple
    source: str = ""
    molecules: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            raise DataError("record ids must be unique")
        acts = [r.activity for r in self.records]
        if not all(math.isfinite(a) for a in acts):
            raise DataError("activities must be finite")
        if not self.molecules:
            object.__setattr__(self, "molecules", tuple(parse_smiles(r.smiles) for r in self.records))

    def __len__(self):
        return len(self.records)

    @property
    def ids(self):
        return tuple(r.id for r in self.records)

    @property
    def activities(self):
        return np.array([r.activity for r in self.records], dtype=np.float64)

    def index_of(self, ids):
        pos = {r.id: i for i, r in enumerate(self.records)}
        return np.array([pos[i] for i in ids], dtype=np.int64)

    def digest(self):
        h = hashlib.sha256()
        for r in self.records:
            h.update(f"{r.id}\t{r.smiles}\t{r.activity!r}\n".encode())
        return h.hexdigest()

    def with_activities(self, activities):
        recs = tuple(
            Record(r.id, r.smiles, float(a), r.rows) for r, a in zip(self.records, activities)
        )
        return Dataset(recs, self.source, self.molecules)

    @classmethod
    def from_rows(cls, rows, source="<memory>"):
        """Build from ``(id, smiles, activity)`` triples, merging duplicates."""
        triples = [(str(i), s, float(a), n + 1) for n, (i, s, a) in enumerate(rows)]
        return _curate(triples, source)


def _transform(value, transform):
    if transform == "none":
        return value
    if value <= 0:
        raise ValueError("IC50 must be positive")
    if transform == "ic50-nm":
        return 9.0 - math.log10(value)
    if transform == "ic50-um":
        return 6.0 - math.log10(value)
    raise ConfigError(f"unknown activity transform {transform!r}; expected {ACTIVITY_TRANSFORMS}")


def load_csv(path, activity_transform="none"):
    """Read an ``id,smiles,activity`` CSV (header order/case insensitive).

    Row numbers in error messages are 1-based file lines (header is line 1).
    """
    if activity_transform not in ACTIVITY_TRANSFORMS:
        raise ConfigError(f"unknown activity transform {activity_transform!r}")
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        cols = {h.strip().lower(): k for k, h in enumerate(header)}
        missing = [c for c in ("id", "smiles", "activity") if c not in cols]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        triples = []
        for row in reader:
            line = reader.line_num
            if not any(cell.strip() for cell in row):
                continue
            try:
                rid = row[cols["id"]].strip()
                smi = row[cols["smiles"]].strip()
                raw = row[cols["activity"]].strip()
            except IndexError:
                raise DataError(f"{path}: row {line}: too few fields") from None
            try:
                value = float(raw)
                if not math.isfinite(value):
                    raise ValueError
                value = _transform(value, activity_transform)
            except ValueError:
                raise DataError(f"{path}: row {line}: non-numeric or invalid activity {raw!r}") from None
            triples.append((rid, smi, value, line))
    return _curate(triples, str(path))


def _curate(triples, source):
    seen_ids = {}
    parsed = []
    for rid, smi, act, line in triples:
        if not rid:
            raise DataError(f"{source}: row {line}: empty id")
        if rid in seen_ids:
            raise DataError(f"{source}: row {line}: duplicate id {rid!r} (first at row {seen_ids[rid]})")
        seen_ids[rid] = line
        try:
            mol = parse_smiles(smi)
        except SmilesError as exc:
            raise DataError(f"{source}: row {line}: {exc}") from exc
        parsed.append((rid, smi, act, line, mol))

    buckets = defaultdict(list)
    for item in parsed:
        buckets[structure_key(item[4])].append(item)

    groups = []  # lists of items that are the same structure
    for bucket in buckets.values():
        classes = []
        for item in bucket:
            for cls in classes:
                if same_structure(cls[0][4], item[4]):
                    cls.append(item)
                    break
            else:
                classes.append([item])
        groups.extend(classes)
    groups.sort(key=lambda g: g[0][3])

    records, mols = [], []
    for group in groups:
        first = group[0]
        if len(group) == 1:
            records.append(Record(first[0], first[1], first[2], (first[3],)))
            mols.append(first[4])
            continue
        acts = [g[2] for g in group]
        rows = tuple(g[3] for g in group)
        desc = ", ".join(f"row {g[3]} ({g[0]}: {g[2]:g})" for g in group)
        if max(acts) - min(acts) > DUPLICATE_TOLERANCE + 1e-9:
            raise DuplicateConflictError(
                f"{source}: duplicate structures with conflicting activities: {desc}", rows
            )
        records.append(Record(first[0], first[1], float(np.mean(acts)), rows))
        mols.append(first[4])
    return Dataset(tuple(records), source, tuple(mols))


# ---------------------------------------------------------------------------
# splitting


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float
    seed: int
    train_ids: tuple
    test_ids: tuple
    interval: int = 0
    replicate: int = 0

    def to_json(self):
        return {
            "train_fraction": self.train_fraction,
            "seed": self.seed,
            "interval": self.interval,
            "replicate": self.replicate,
            "train_ids": list(self.train_ids),
            "test_ids": list(self.test_ids),
        }

    @classmethod
    def from_json(cls, obj):
        return cls(obj["train_fraction"], obj["seed"], tuple(obj["train_ids"]),
                   tuple(obj["test_ids"]), obj.get("interval", 0), obj.get("replicate", 0))


def round_half_up(x):
    return int(math.floor(x + 0.5 + 1e-9))


def train_size(n, train_fraction):
    return round_half_up(train_fraction * n)


def stratified_split(ds, train_fraction, seed, *, interval=0, replicate=0):
    """Activity-sorted block sampling.

    Records are sorted by activity (ties by id) and cut into contiguous blocks
    of ``round(1 / (1 - train_fraction))``.  One member of every block goes to
    the test set; surplus picks are trimmed, and a shortfall is topped up,
    by seeded uniform choice so the test set has exactly
    ``n - round(train_fraction * n)`` members.
    """
    lo, hi = FRACTION_RANGE
    if not lo - 1e-12 <= train_fraction <= hi + 1e-12:
        raise ConfigError(f"train_fraction {train_fraction} outside [{lo}, {hi}]")
    n = len(ds)
    if n < MIN_RECORDS:
        raise DataError(f"dataset has {n} records; at least {MIN_RECORDS} are required")
    n_test = n - train_size(n, train_fraction)
    block = max(1, round_half_up(1.0 / (1.0 - train_fraction)))
    acts = ds.activities
    ids = ds.ids
    order = sorted(range(n), key=lambda i: (acts[i], ids[i]))
    rng = np.random.Generator(np.random.PCG64(seed))
    picks = []
    for start in range(0, n, block):
        members = order[start:start + block]
        picks.append(members[int(rng.integers(len(members)))])
    if len(picks) > n_test:
        drop = set(rng.choice(len(picks), len(picks) - n_test, replace=False).tolist())
        picks = [p for k, p in enumerate(picks) if k not in drop]
    elif len(picks) < n_test:
        chosen = set(picks)
        remaining = [i for i in order if i not in chosen]
        extra = rng.choice(len(remaining), n_test - len(picks), replace=False)
        picks.extend(remaining[k] for k in sorted(extra.tolist()))
    test = set(picks)
    return SplitSpec(
        float(train_fraction), int(seed),
        tuple(ids[i] for i in range(n) if i not in test),
        tuple(ids[i] for i in range(n) if i in test),
        interval, replicate,
    )


def fraction_grid(frac_min, frac_max, step):
    if step <= 0:
        raise ConfigError("step must be positive")
    if frac_min > frac_max:
        raise ConfigError("frac_min must not exceed frac_max")
    lo, hi = FRACTION_RANGE
    if frac_min < lo - 1e-12 or frac_max > hi + 1e-12:
        raise ConfigError(f"training fractions must lie in [{lo}, {hi}]")
    count = int(math.floor((frac_max - frac_min) / step + 1e-9)) + 1
    return [round(frac_min + i * step, 10) for i in range(count)]


def split_grid(ds, frac_min=0.70, frac_max=0.80, step=0.01, models_per_interval=99, master_seed=0):
    if models_per_interval < 1:
        raise ConfigError("models_per_interval must be >= 1")
    splits = []
    for i, frac in enumerate(fraction_grid(frac_min, frac_max, step)):
        for j in range(models_per_interval):
            seed = derive_seed(master_seed, i, j)
            splits.append(stratified_split(ds, frac, seed, interval=i, replicate=j))
    return splits
