"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; setting
``ARTINV_PURE_PYTHON=1`` forces the numpy fallback.
"""
from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if not os.environ.get("ARTINV_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build
        _impl = _kernels_py

area_function = _impl.area_function
tract_denominator = _impl.tract_denominator
tract_resonances = _impl.tract_resonances

__all__ = ["BACKEND", "area_function", "tract_denominator", "tract_resonances"]
