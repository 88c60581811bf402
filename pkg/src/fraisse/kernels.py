"""Kernel selection: compiled extension when available, pure Python otherwise.

Set FRAISSE_PURE=1 to force the pure lane (used by the benchmark and by the
test suite to cover both lanes).
"""

from __future__ import annotations

import os

from . import _pure

if os.environ.get("FRAISSE_PURE") == "1":
    _impl = _pure
else:
    try:
        from . import _speedups as _impl
    except ImportError:  # pragma: no cover - source tree without built ext
        _impl = _pure

BACKEND = _impl.BACKEND
struct_key = _impl.struct_key
best_relabeling = _impl.best_relabeling
