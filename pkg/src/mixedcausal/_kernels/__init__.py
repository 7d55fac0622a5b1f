"""Regression kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
used otherwise. Set ``MIXEDCAUSAL_PURE_PYTHON=1`` to force the fallback
(used by the backend-comparison benchmark and tests).
"""

from __future__ import annotations

import os

from . import pyref

if os.environ.get("MIXEDCAUSAL_PURE_PYTHON") == "1":
    _impl = pyref
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = pyref

BACKEND: str = _impl.BACKEND
PIVOT_RTOL: float = _impl.PIVOT_RTOL
linear_fit = _impl.linear_fit
multinomial_fit = _impl.multinomial_fit


def get_backend(name: str | None = None):
    """Return a kernel module by name ('compiled', 'python', or None=active)."""
    if name is None:
        return _impl
    if name == "python":
        return pyref
    if name == "compiled":
        from . import _core

        return _core
    raise ValueError(f"unknown kernel backend: {name!r}")
