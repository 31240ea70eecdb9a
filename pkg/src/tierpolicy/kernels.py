"""Kernel backend selection.

The compiled extension is used when it was built; otherwise (or when the
``TIERPOLICY_PURE_PYTHON`` environment variable is set to a non-empty value
other than ``0``) the pure-Python implementation is used.  Both operate on
``array.array`` buffers: ``'q'`` for integers, ``'B'`` for op codes.
"""

import os

from . import _pykernels

BACKEND = "python"
charge_epoch = _pykernels.charge_epoch
best_assignment = _pykernels.best_assignment

if os.environ.get("TIERPOLICY_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        charge_epoch = _ckernels.charge_epoch
        best_assignment = _ckernels.best_assignment


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        found["cython"] = _ckernels
    return found
