"""Backend selection for the RK4 kernels.

The compiled extension is preferred; the numpy fallback is used when it is not
built or when ``MPCQUANT_PURE_PYTHON`` is set to a non-empty value other than
``0``.
"""

import os

from . import _kernels_py

_force_py = os.environ.get("MPCQUANT_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

eval_slots = _impl.eval_slots
rk4_flow = _impl.rk4_flow
rk4_variational = _impl.rk4_variational

__all__ = ["BACKEND", "eval_slots", "rk4_flow", "rk4_variational", "python_backend"]


def python_backend():
    """The pure-Python kernel module, regardless of the active backend."""
    return _kernels_py


def compiled_backend():
    """The compiled kernel module, or ``None`` if it is not built."""
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels
