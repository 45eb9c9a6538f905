"""Backend selection: compiled extension if available, NumPy otherwise.

Set ``IMPACTREG_BACKEND=python`` or ``compiled`` to force a choice; the
compiled choice raises if the extension failed to build.
"""

from __future__ import annotations

import os

from . import _kernel_py

_requested = os.environ.get("IMPACTREG_BACKEND", "").strip().lower()

if _requested == "python":
    _impl = _kernel_py
elif _requested == "compiled":
    from . import _kernel as _impl  # noqa: F401  (ImportError is the signal)
else:
    try:
        from . import _kernel as _impl
    except ImportError:
        _impl = _kernel_py

BACKEND_NAME = _impl.BACKEND_NAME
ols_sandwich = _impl.ols_sandwich


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active one)."""
    if name in (None, BACKEND_NAME):
        return _impl
    if name == "python":
        return _kernel_py
    if name == "compiled":
        from . import _kernel
        return _kernel
    raise ValueError(f"unknown backend {name!r}")
