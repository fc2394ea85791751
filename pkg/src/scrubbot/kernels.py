"""Pixel kernels, compiled when available.

``SCRUBBOT_PURE_PYTHON=1`` forces the pure-Python implementation.
"""

import os

from . import _kernels_py

if os.environ.get("SCRUBBOT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

label = _impl.label
trace = _impl.trace
squared_edt = _impl.squared_edt
