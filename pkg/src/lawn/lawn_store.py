"""Lawn store with backend selection.

``LawnStore`` is the compiled implementation when ``lawn._lawn_ext`` imports
cleanly, otherwise the pure-Python one. Set ``LAWN_PURE_PYTHON=1`` to force
the fallback. Both classes stay importable for side-by-side comparison.
"""

import os

from ._pylawn import LawnStore as PyLawnStore

try:
    if os.environ.get("LAWN_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend forced by LAWN_PURE_PYTHON")
    from ._lawn_ext import LawnStore as ExtLawnStore
except ImportError:
    ExtLawnStore = None

LawnStore = ExtLawnStore if ExtLawnStore is not None else PyLawnStore
BACKEND = LawnStore.backend

BACKENDS = {"python": PyLawnStore}
if ExtLawnStore is not None:
    BACKENDS["cython"] = ExtLawnStore

__all__ = ["LawnStore", "PyLawnStore", "ExtLawnStore", "BACKEND", "BACKENDS"]
