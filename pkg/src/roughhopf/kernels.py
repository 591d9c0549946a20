"""Kernel selection: the compiled extension when built, NumPy otherwise.

Set ``ROUGHHOPF_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

if os.environ.get("ROUGHHOPF_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

eval_field = _impl.eval_field
rk4_chain = _impl.rk4_chain
rk4_many = _impl.rk4_many

__all__ = ["BACKEND", "eval_field", "rk4_chain", "rk4_many"]
