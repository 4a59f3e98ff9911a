"""Kernel selection: compiled extension when importable, pure Python otherwise.

Set ``QTRAJ_PURE_PYTHON=1`` to force the fallback.  ``IMPLEMENTATIONS`` lists every
importable implementation so tests and benchmarks can compare them.
"""
import os

from . import _kernels_py

IMPLEMENTATIONS = {"python": _kernels_py}
try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None
else:
    IMPLEMENTATIONS["compiled"] = _compiled

if os.environ.get("QTRAJ_PURE_PYTHON", "") not in ("", "0") or _compiled is None:
    _impl = _kernels_py
else:
    _impl = _compiled

BACKEND = "compiled" if _impl is _compiled else "python"

taylor_table = _impl.taylor_table
taylor_eval = _impl.taylor_eval
