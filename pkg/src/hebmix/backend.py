"""Kernel backend selection: compiled extension with pure-numpy fallback.

The compiled module is preferred when importable.  ``HEBMIX_BACKEND=numpy``
or ``HEBMIX_BACKEND=cython`` forces a choice (the latter fails loudly if the
extension was not built).  Results are bit-reproducible per backend; across
backends they agree to floating-point rounding of the field reductions.
"""

from __future__ import annotations

import os

from . import _fallback

_FORCED = os.environ.get("HEBMIX_BACKEND", "").strip().lower()

if _FORCED == "numpy":
    _impl = _fallback
elif _FORCED == "cython":
    from . import _kernels as _impl  # noqa: F401  (ImportError is the point)
else:
    if _FORCED:
        raise RuntimeError(f"HEBMIX_BACKEND must be 'numpy' or 'cython', got {_FORCED!r}")
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _fallback


def get_backend():
    """Active kernel module (attributes: NAME, run_chain, enum_logz)."""
    return _impl


def backend_name() -> str:
    return _impl.NAME


def available_backends() -> list[str]:
    names = ["numpy"]
    try:
        from . import _kernels  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names


def backend_by_name(name: str):
    """Explicit backend lookup, used when replaying manifests."""
    if name == "numpy":
        return _fallback
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
