"""Kernel backend selection.

The compiled extension is preferred when built; the pure NumPy backend is
the fallback. Set VSYS_PURE_PYTHON=1 to force the fallback (useful for
benchmark comparisons and debugging).
"""

from __future__ import annotations

import os

from . import pyref

if os.environ.get("VSYS_PURE_PYTHON", "") not in ("", "0"):
    _impl = pyref
else:
    try:
        from . import native as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pyref

BACKEND = _impl.BACKEND_NAME
expm = _impl.expm
propagate_affine = _impl.propagate_affine
rk45_affine = _impl.rk45_affine

_BACKENDS = {"python": pyref}
if _impl is not pyref:
    _BACKENDS["cython"] = _impl


def available_backends() -> tuple[str, ...]:
    names = ["python"]
    if "cython" not in _BACKENDS:
        try:
            from . import native

            _BACKENDS["cython"] = native
        except ImportError:
            pass
    if "cython" in _BACKENDS:
        names.append("cython")
    return tuple(names)


def get_backend(name: str):
    """Fetch a backend module by name ('python' or 'cython')."""
    available_backends()
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}") from None
