"""Numba switch shared by every hot kernel.

Kernels are written twice: an explicit-loop version compiled with numba, and a
vectorised numpy version.  ``SCADDA_NO_NUMBA=1`` (or a missing numba install)
routes every public function through the numpy versions instead.
"""
import os

_FLAG = os.environ.get("SCADDA_NO_NUMBA", "").strip().lower()
_DISABLED = _FLAG in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False
    _njit = None

USE_NUMBA = HAS_NUMBA and not _DISABLED

JIT_KWARGS = {"nogil": True, "cache": True, "fastmath": False}


def njit(func):
    """Compile ``func`` in nopython mode if numba is usable, else return it as is."""
    if _njit is None:
        return func
    return _njit(**JIT_KWARGS)(func)


def pick(jitted, fallback):
    """Return the kernel the current process should dispatch to."""
    return jitted if USE_NUMBA else fallback
