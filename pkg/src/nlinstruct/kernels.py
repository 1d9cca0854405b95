"""Kernel backend selection.

Imports the compiled extension when available, otherwise the pure-Python
fallback. ``NLINSTRUCT_FORCE_PYTHON=1`` pins the fallback (used by the
benchmark and by backend-equivalence tests).
"""

from __future__ import annotations

import os

if os.environ.get("NLINSTRUCT_FORCE_PYTHON"):
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _pykernels as _impl

BACKEND: str = _impl.BACKEND
dot = _impl.dot
add_scaled = _impl.add_scaled
adagrad_update = _impl.adagrad_update
