"""Selects the kernel backend at import time.

The compiled extension is preferred; set CRITCHECK_PURE=1 to force the
pure-numpy implementation (used by the benchmark and the fallback tests).
"""
import os

if os.environ.get("CRITCHECK_PURE", "") not in ("", "0"):
    from . import _kernels_py as kernels
    BACKEND = "pure"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]
        BACKEND = "pure"

geometric_apply = kernels.geometric_apply
box_filter = kernels.box_filter
