"""Select the region-growing kernel at import time.

The compiled Cython kernel is preferred; the pure-numpy fallback has identical
semantics and is used when the extension is unavailable or when
``PHENOSEG_PURE_PYTHON=1`` is set (handy for benchmarking the two).
"""

from __future__ import annotations

import os

from . import _pure

FORCE_PURE = os.environ.get("PHENOSEG_PURE_PYTHON", "") == "1"

if FORCE_PURE:
    grow_kernel = _pure.grow_kernel
    BACKEND = "pure"
else:
    try:
        from ._core import grow_kernel  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        grow_kernel = _pure.grow_kernel
        BACKEND = "pure"
