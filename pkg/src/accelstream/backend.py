"""Numba/numpy backend selection for the hot kernels.

Every kernel in :mod:`accelstream.kernels` exists in two variants: a
numba ``@njit`` loop version and a vectorized pure-numpy version.  Which
one runs is decided per call from the active backend, so the benchmark
script and the test suite can compare both paths in one process.

The initial backend comes from the ``ACCELSTREAM_BACKEND`` environment
variable ("numba" or "numpy").  The default is "numba" when numba
imports cleanly, otherwise "numpy".  Both paths are deterministic; the
numpy path is the reference, the numba path exists for speed.
"""

from __future__ import annotations

import os

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

ENV_VAR = "ACCELSTREAM_BACKEND"

_VALID = ("numba", "numpy")


def _initial_backend() -> str:
    value = os.environ.get(ENV_VAR, "").strip().lower()
    if value == "numpy":
        return "numpy"
    if value == "numba":
        if not HAVE_NUMBA:
            raise ImportError(
                f"{ENV_VAR}=numba requested but numba is not importable"
            )
        return "numba"
    return "numba" if HAVE_NUMBA else "numpy"


_backend = _initial_backend()


def current_backend() -> str:
    """Name of the active kernel backend, "numba" or "numpy"."""
    return _backend


def using_numba() -> bool:
    return _backend == "numba"


def set_backend(name: str) -> None:
    """Switch the kernel backend at runtime.

    Raises ValueError for unknown names and RuntimeError when "numba"
    is requested but numba is not installed.
    """
    global _backend
    if name not in _VALID:
        raise ValueError(f"unknown backend {name!r}, expected one of {_VALID}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    _backend = name
