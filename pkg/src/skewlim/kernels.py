"""Backend selection for the hot kernels.

The compiled extension is used when it was built; otherwise the pure-Python
module with the same API. Setting ``SKEWLIM_PURE_PYTHON=1`` forces the
fallback.
"""

import os

from . import _speedups_py

if os.environ.get("SKEWLIM_PURE_PYTHON"):
    _impl = _speedups_py
else:
    try:
        from . import _speedups as _impl
    except ImportError:  # extension not built
        _impl = _speedups_py

BACKEND = "python" if _impl is _speedups_py else "cython"

minimal_period = _impl.minimal_period
trim_threshold = _impl.trim_threshold
Program = _impl.Program


def available_backends():
    """Map backend name to module for every importable implementation."""
    found = {"python": _speedups_py}
    try:
        from . import _speedups
    except ImportError:
        pass
    else:
        found["cython"] = _speedups
    return found
