"""Select between numba-compiled kernels and the plain numpy path.

Set ``RMFRAME_NUMBA=0`` before import to run every kernel as ordinary
Python/numpy. The uncompiled function is always reachable as ``kernel.py_func``
so both paths can be compared in one process (see ``benchmarks/``).
"""

import os

_FLAG = os.environ.get("RMFRAME_NUMBA", "1").strip().lower()

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and _FLAG not in ("0", "false", "no", "off")


def jit(fn):
    """``numba.njit(cache=True)`` when enabled, otherwise ``fn`` with a
    ``py_func`` attribute pointing at itself."""
    if USE_NUMBA:
        return numba.njit(cache=True)(fn)
    fn.py_func = fn
    return fn
