"""Stable 64-bit hashing used for fingerprint keys, seeds and model ids.

Python's builtin ``hash`` is salted per process, so everything that must be
reproducible across runs and platforms goes through these helpers instead.
"""

MASK64 = (1 << 64) - 1

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & MASK64
    return h


def hash_str(text: str) -> int:
    return splitmix64(fnv1a64(text.encode("utf-8")))


def hash_ints(values) -> int:
    """Order-sensitive combination of a sequence of integers."""
    h = 0x2545F4914F6CDD1D
    for v in values:
        h = splitmix64(h ^ (v & MASK64))
    return h


def derive_seed(master_seed: int, *indices: int) -> int:
    # each index is mixed separately so seed(i, j) does not depend on grid width
    return hash_ints((master_seed, *indices)) & ((1 << 63) - 1)
