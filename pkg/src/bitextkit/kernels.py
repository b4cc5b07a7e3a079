"""Select the compiled kernels when available, else the Python fallback.

Set ``BITEXTKIT_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from bitextkit import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("BITEXTKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from bitextkit._ext import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:
        pass

class_histogram = _impl.class_histogram
sinkhorn_scale = _impl.sinkhorn_scale


def available_backends() -> dict[str, object]:
    out: dict[str, object] = {"python": _pykernels}
    try:
        from bitextkit._ext import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
