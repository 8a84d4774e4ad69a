"""Kernel backend selection.

The compiled extension is used when it imported cleanly; otherwise the
numpy fallback takes over. Set MERGEBBO_KERNEL=py or MERGEBBO_KERNEL=c to
force a backend (forcing c raises if the extension is unavailable).

Backends agree to floating-point roundoff but are not bit-identical to each
other; determinism guarantees hold within a single backend.
"""

import os

from . import _pykernels

_requested = os.environ.get("MERGEBBO_KERNEL", "").lower()

if _requested in ("py", "python"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        if _requested in ("c", "cython"):
            raise
        _impl = _pykernels

BACKEND = _impl.BACKEND
masked_sphere_value = _impl.masked_sphere_value
merged_forward = _impl.merged_forward
merged_mse = _impl.merged_mse


def available_backends():
    names = ["python"]
    try:
        from . import _ckernels  # noqa: F401

        names.append("cython")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Return the module implementing the named backend."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
