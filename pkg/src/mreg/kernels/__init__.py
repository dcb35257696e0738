"""Hot-loop kernels with backend selection.

The compiled extension is preferred when it imported cleanly; the
pure-NumPy fallback is always available.  ``get_backend`` lets callers
(and the benchmark) pin one explicitly.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import _pyref

try:
    from . import _core

    HAVE_COMPILED = True
except ImportError:  # extension not built on this install
    _core = None
    HAVE_COMPILED = False

_DEFAULT = _core if HAVE_COMPILED else _pyref

__all__ = ["HAVE_COMPILED", "get_backend", "default_backend_name", "resolve_threads"]


def default_backend_name() -> str:
    return _DEFAULT.BACKEND


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name``: 'auto' (default), 'compiled', or 'python'."""
    if name is None or name == "auto":
        return _DEFAULT
    if name == "python":
        return _pyref
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled kernel backend is not available on this install")
        return _core
    raise ValueError(f"unknown backend {name!r}; expected 'auto', 'compiled', or 'python'")


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else MREG_THREADS, else machine cores."""
    if threads is None:
        env = os.environ.get("MREG_THREADS")
        if env is not None:
            try:
                threads = int(env)
            except ValueError:
                raise ValueError(f"MREG_THREADS must be an integer, got {env!r}") from None
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"thread count must be >= 1, got {threads}")
    return threads
