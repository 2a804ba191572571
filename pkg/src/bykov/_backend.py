"""Kernel backend selection.

The compiled extension is used when it imports; ``BYKOV_PURE_PYTHON=1``
forces the pure-Python fallback.
"""
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def available() -> list[str]:
    names = ["python"]
    if _ckernels is not None:
        names.insert(0, "cython")
    return names


def get_kernels(name: str | None = None):
    """Return a kernel module by name (``"cython"`` or ``"python"``)."""
    if name is None:
        return kernels
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built")
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


if os.environ.get("BYKOV_PURE_PYTHON", "") not in ("", "0") or _ckernels is None:
    kernels = _pykernels
else:
    kernels = _ckernels

BACKEND = kernels.NAME
