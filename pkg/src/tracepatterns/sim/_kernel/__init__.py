"""Kernel backend selection.

The compiled extension is preferred; the pure-Python twin is used when the
extension is unavailable or when TRACEPATTERNS_PURE is set. Both produce
bit-identical results (see reference.py).
"""

import os

from . import reference

if os.environ.get("TRACEPATTERNS_PURE"):
    _impl = reference
    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        _impl = reference
        BACKEND = "python"

step_world = _impl.step_world
scan_contacts = _impl.scan_contacts

__all__ = ["BACKEND", "reference", "scan_contacts", "step_world"]
