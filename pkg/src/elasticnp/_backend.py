"""Select the compiled kernel loops when available.

Set ``ELASTICNP_PURE_PYTHON=1`` to force the numpy implementation.
"""
from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
kernel_rows_3d = _pykernels.kernel_rows_3d
potential_terms = _pykernels.potential_terms

if os.environ.get("ELASTICNP_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        pass
    else:
        BACKEND = "cython"
        kernel_rows_3d = _ckernels.kernel_rows_3d
        potential_terms = _ckernels.potential_terms

__all__ = ["BACKEND", "kernel_rows_3d", "potential_terms"]
