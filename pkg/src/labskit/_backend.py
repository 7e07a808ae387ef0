"""Kernel backend selection.

Every hot loop in this package has two implementations: a numba-compiled
kernel and a pure-numpy fallback. The active path is chosen once at import
time. Setting ``LABS_PURE_NUMPY=1`` in the environment (or numba being
unavailable) selects the numpy path; ``labskit.bench`` times both.
"""
from __future__ import annotations

import os

_flag = os.environ.get("LABS_PURE_NUMPY", "").strip().lower()
PURE_NUMPY_REQUESTED = _flag in {"1", "true", "yes", "on"}

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not PURE_NUMPY_REQUESTED


def active_backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
