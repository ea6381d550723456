"""Simulation kernel backends.

The inner simulation loop exists twice: a numba-jitted scalar loop (the
default when numba imports cleanly) and a vectorised pure-numpy fallback.
Set the environment variable ``GUSL_BACKEND`` to ``numba`` or ``numpy`` to
force one; library callers can also pass ``backend=`` explicitly, which
wins over the environment.

Both backends implement the same ``advance_chunk`` contract and agree to
within a few ulps per step; see ``benchmarks/backend_bench.py`` for a
side-by-side timing and agreement check.
"""

from __future__ import annotations

import importlib
import os

BACKEND_ENV = "GUSL_BACKEND"
BACKENDS = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        importlib.import_module("numba")
    except Exception:
        return False
    return True


def resolve_backend(name: str | None = None) -> str:
    """Pick the backend: explicit argument, then env var, then default."""
    requested = name or os.environ.get(BACKEND_ENV, "").strip().lower()
    if not requested:
        return "numba" if _numba_available() else "numpy"
    if requested not in BACKENDS:
        raise ValueError(
            f"unknown backend {requested!r}; expected one of {', '.join(BACKENDS)}"
        )
    if requested == "numba" and not _numba_available():
        raise RuntimeError("backend 'numba' requested but numba is not importable")
    return requested


def load_kernels(name: str | None = None):
    """Return the kernel module for the resolved backend."""
    backend = resolve_backend(name)
    if backend == "numba":
        return importlib.import_module("gusl._kernels_numba")
    return importlib.import_module("gusl._kernels_numpy")
