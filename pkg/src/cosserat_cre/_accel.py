"""Numba switch for the hot kernels.

Every kernel in the package is written once as plain Python/numpy. When numba
is importable and ``CRE_DISABLE_NUMBA`` is unset (or ``0``), the kernels are
compiled with ``numba.njit``; otherwise the interpreted versions run. The
interpreted twin of each compiled kernel stays reachable through ``.py_func``
so the benchmark and the tests can compare both paths in one process.
"""

import logging
import os

__all__ = ["USE_NUMBA", "njit"]

_flag = os.environ.get("CRE_DISABLE_NUMBA", "0").strip().lower()

try:
    import numba

    logging.getLogger("numba").setLevel(logging.WARNING)
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and _flag in ("", "0", "false", "no")


def njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged.

    The returned object always exposes ``py_func``.
    """
    if USE_NUMBA:
        return numba.njit(cache=True)(func)
    func.py_func = func
    return func
