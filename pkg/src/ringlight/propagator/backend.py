"""Kernel backend selection: compiled extension or pure-Python fallback.

The compiled core (``ringlight._core``, Cython) and the fallback
(:mod:`.kernels_fallback`) implement identical operators; the extension
is picked automatically at import when present.  Set the environment
variable ``RINGLIGHT_BACKEND`` to ``python`` or ``compiled`` to force a
choice (forcing ``compiled`` raises if the extension is missing).
"""

import os

from . import kernels_fallback

_SELECTED = None


def _load_compiled():
    from .. import _core  # noqa: F401  (ImportError propagates to caller)
    from . import kernels_compiled
    return kernels_compiled


def kernels(force=None):
    """Return the active kernel module (cached)."""
    global _SELECTED
    choice = force or os.environ.get("RINGLIGHT_BACKEND", "").lower() or None
    if choice == "python":
        return kernels_fallback
    if choice == "compiled":
        return _load_compiled()
    if _SELECTED is None:
        try:
            _SELECTED = _load_compiled()
        except ImportError:
            _SELECTED = kernels_fallback
    return _SELECTED


def backend_name():
    return kernels().BACKEND_NAME
