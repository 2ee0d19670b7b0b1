"""Backend selection for the split-step kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``COUPLEDFWM_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementation is used.
"""

import os

from . import _kernels_py

BACKEND = "python"
nonlinear_rk4 = _kernels_py.nonlinear_rk4
apply_linear = _kernels_py.apply_linear

if os.environ.get("COUPLEDFWM_PURE_PYTHON", "0") in ("", "0"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        _compiled = None
    if _compiled is not None:
        BACKEND = "cython"
        nonlinear_rk4 = _compiled.nonlinear_rk4
        apply_linear = _compiled.apply_linear


def get_backend(name=None):
    """``(nonlinear_rk4, apply_linear)`` for ``name`` ("python", "cython" or the default)."""
    if name is None:
        return nonlinear_rk4, apply_linear
    if name == "python":
        return _kernels_py.nonlinear_rk4, _kernels_py.apply_linear
    if name == "cython":
        from . import _kernels as mod  # raises ImportError if unavailable

        return mod.nonlinear_rk4, mod.apply_linear
    raise ValueError(f"unknown backend {name!r}")
