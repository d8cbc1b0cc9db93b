"""Kernel backend selection.

The compiled extension is preferred. Setting ``VQOC_PURE_PYTHON=1`` forces the
numpy fallback, which is also used whenever the extension failed to build.
"""

import os

from . import _kernels_py

kernels = _kernels_py
BACKEND = "python"

if not os.environ.get("VQOC_PURE_PYTHON"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"


def get_kernels(name=None):
    """Return the kernel module for ``name`` ("cython" or "python"), or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
