"""Backend selection for the split-scan hot loop.

The compiled extension is used when it imports; setting the environment
variable ``STEPSHIFT_PURE_PYTHON=1`` forces the NumPy fallback.
"""

import os

from . import _pykernels

try:
    if os.environ.get("STEPSHIFT_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python kernels requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

if _compiled is not None:
    BACKEND = "cython"
    lrt_profile = _compiled.lrt_profile
    lrt_profiles = _compiled.lrt_profiles
else:
    BACKEND = "python"
    lrt_profile = _pykernels.lrt_profile
    lrt_profiles = _pykernels.lrt_profiles


def available_backends():
    """Map backend name to its module, compiled first when present."""
    out = {}
    if _compiled is not None:
        out["cython"] = _compiled
    out["python"] = _pykernels
    return out
