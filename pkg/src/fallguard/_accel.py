"""Backend selection for the numeric kernels.

Set ``FALLGUARD_DISABLE_NUMBA=1`` to force the pure-numpy path.  When numba
is not importable the numpy path is used regardless of the flag.
"""

import os

_FLAG = os.environ.get("FALLGUARD_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the default install
    HAVE_NUMBA = False
    _njit = None

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"
