"""Numba switch.

Set ``COLLECTIVE_QUBIT_NUMBA=0`` before import to force the pure-numpy kernels.
"""

import os

_FLAG = os.environ.get("COLLECTIVE_QUBIT_NUMBA", "1").strip().lower()

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("0", "false", "no", "off")


def njit(func):
    """Compile ``func`` with numba when enabled, else return it untouched."""
    if USE_NUMBA:
        return numba.njit(cache=True, fastmath=False)(func)
    return func
