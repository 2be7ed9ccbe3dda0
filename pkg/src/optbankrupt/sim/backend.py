"""Kernel selection: the compiled extension if it imports, else numpy.

Set ``OPTBANKRUPT_PURE_PYTHON=1`` to force the numpy kernels.
"""

from __future__ import annotations

import os

from . import _fallback

fallback = _fallback

if os.environ.get("OPTBANKRUPT_PURE_PYTHON", "") not in ("", "0"):
    kernels = _fallback
    COMPILED = False
else:
    try:
        from . import _kernels as kernels
        COMPILED = True
    except ImportError:  # extension not built
        kernels = _fallback
        COMPILED = False

NAME = "cython" if COMPILED else "numpy"
