"""Kernel backend selection.

The compiled extension is preferred; setting ``QKDAUTH_PURE_PYTHON=1`` or a
missing/failed build selects the pure-Python kernels instead.
"""

import os
import sys

from qkdauth import _pykernels

kernels = _pykernels
if os.environ.get("QKDAUTH_PURE_PYTHON", "") in ("", "0") and sys.byteorder == "little":
    try:
        from qkdauth import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _pykernels

BACKEND = kernels.NAME


def available():
    """Return the kernel modules that can be loaded in this process."""
    mods = {"python": _pykernels}
    try:
        from qkdauth import _kernels
    except ImportError:
        pass
    else:
        mods["cython"] = _kernels
    return mods
