"""
Backend selection for the hot numeric kernels.

Every kernel ships twice: a loop-style version compiled with numba's
``@njit`` and a vectorized pure-numpy version. The numba path is used
when numba imports cleanly and ``MRDCSIS_DISABLE_NUMBA`` is unset (or
set to ``0``/``false``/empty). Both paths produce the same answers; the
numpy one is there for platforms without numba and for cross-checking.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def decorator(func):
            return func

        return decorator


def numba_disabled_by_env() -> bool:
    return os.environ.get("MRDCSIS_DISABLE_NUMBA", "").strip().lower() not in _FALSY


def default_backend() -> str:
    """Return ``"numba"`` or ``"numpy"`` according to availability and env."""
    if NUMBA_AVAILABLE and not numba_disabled_by_env():
        return "numba"
    return "numpy"


def available_backends() -> tuple:
    return ("numba", "numpy") if NUMBA_AVAILABLE else ("numpy",)


def resolve_backend(backend) -> str:
    if backend is None:
        return default_backend()
    if backend not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {backend!r}; expected 'numba' or 'numpy'")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is not importable")
    return backend
