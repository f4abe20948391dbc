"""Kernel backend selection.

Numba is used when importable unless ``CHIRALCHAIN_DISABLE_NUMBA`` is set to a
truthy value, in which case every kernel runs on its pure-numpy path.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested() -> bool:
    return os.environ.get("CHIRALCHAIN_DISABLE_NUMBA", "").strip().lower() in _FALSY


try:
    if not _numba_requested():
        raise ImportError("numba disabled by CHIRALCHAIN_DISABLE_NUMBA")
    from numba import njit

    USE_NUMBA = True
except ImportError:
    USE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


BACKEND = "numba" if USE_NUMBA else "numpy"
