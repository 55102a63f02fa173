"""Kernel backend selection.

The compiled extension is used when it imports cleanly, unless the
``HYBRIDSIZING_PURE_PYTHON`` environment variable is set to a non-empty value.
"""
import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None


def get_kernels(name=None):
    """Return a kernel module: ``"compiled"``, ``"python"`` or ``None`` for the default."""
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled simplex kernels are not built")
        return _compiled
    if name is not None:
        raise ValueError(f"unknown kernel backend {name!r}")
    if _compiled is not None and not os.environ.get("HYBRIDSIZING_PURE_PYTHON"):
        return _compiled
    return _kernels_py


def compiled_available():
    return _compiled is not None


DEFAULT = get_kernels()
