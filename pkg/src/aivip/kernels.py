"""Kernel dispatch: compiled ``_core`` when importable, else ``_core_py``.

Set ``AIVIP_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _core_py

BACKEND = "python"
if not os.environ.get("AIVIP_PURE_PYTHON"):
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _core_py
else:
    _impl = _core_py

ancestor_mask = _impl.ancestor_mask
m_connected = _impl.m_connected
partial_corr = _impl.partial_corr

__all__ = ["BACKEND", "ancestor_mask", "m_connected", "partial_corr"]
