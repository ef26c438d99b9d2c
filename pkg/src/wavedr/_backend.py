"""Select the compiled kernel backend, falling back to numpy.

Set ``WAVEDR_BACKEND=python`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("WAVEDR_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as kernels  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        kernels = _kernels_py


def get_kernels(name=None):
    """Return the kernel module for ``name`` ('cython', 'python' or None)."""
    if name is None:
        return kernels
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    out = ["python"]
    try:
        from . import _kernels  # noqa: F401
        out.insert(0, "cython")
    except ImportError:
        pass
    return out
