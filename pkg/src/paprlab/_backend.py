"""Kernel selection: compiled Cython loops when importable, numpy fallback otherwise.

Set ``PAPRLAB_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

fallback = _fallback

if os.environ.get("PAPRLAB_PURE"):
    kernels = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _fallback
        BACKEND = "python"

compiled = None if kernels is _fallback else kernels
