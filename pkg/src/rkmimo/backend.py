"""Kernel lane selection.

The per-iteration solver loops exist twice with identical signatures and
semantics: a compiled lane (`_kernels_nb`, numba) and a vectorized numpy
lane (`_kernels_np`).  The active lane is chosen once at import from the
``RKMIMO_BACKEND`` environment variable ("numba" or "numpy", default numba
when importable) and can be switched at runtime with :func:`set_backend`,
which is what the benchmark and the equivalence tests do.
"""

from __future__ import annotations

import os

from . import _kernels_np

try:
    from . import _kernels_nb

    _HAVE_NUMBA = _kernels_nb.HAVE_NUMBA
except ImportError:  # pragma: no cover - numba is a hard dependency
    _kernels_nb = None
    _HAVE_NUMBA = False

__all__ = ["active_backend", "set_backend", "kernels", "available_backends"]

_ENV_VAR = "RKMIMO_BACKEND"


def available_backends() -> tuple[str, ...]:
    return ("numba", "numpy") if _HAVE_NUMBA else ("numpy",)


def _resolve_default() -> str:
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice == "":
        return "numba" if _HAVE_NUMBA else "numpy"
    if choice not in ("numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be 'numba' or 'numpy', got {choice!r}"
        )
    if choice == "numba" and not _HAVE_NUMBA:
        raise ValueError(f"{_ENV_VAR}=numba requested but numba is unavailable")
    return choice


_active = _resolve_default()


def active_backend() -> str:
    return _active


def set_backend(name: str) -> str:
    """Switch the kernel lane; returns the previous one."""
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"backend must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable")
    previous = _active
    _active = name
    return previous


def kernels():
    """The module providing the active lane's solver loops."""
    return _kernels_nb if _active == "numba" else _kernels_np
