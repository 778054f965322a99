"""Numba switch.

Hot kernels are written once in numba-compatible Python and once in plain
numpy.  Set ``AUTOQSAR_NUMBA=0`` to force the numpy path (useful for
debugging, profiling or platforms without numba).
"""

import os

_FLAG = os.environ.get("AUTOQSAR_NUMBA", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise a no-op decorator."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    return numba.njit(*args, **kwargs)
