"""Kernel selection.

``TRANSIENT_BENCH_BACKEND=numba`` (default when numba imports) or ``numpy``.
"""

import logging
import os

log = logging.getLogger(__name__)

ENV_VAR = "TRANSIENT_BENCH_BACKEND"
BACKENDS = ("numba", "numpy")


def _numba_available() -> bool:
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def resolve(name=None) -> str:
    name = (name or os.environ.get(ENV_VAR) or "numba").strip().lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose one of {BACKENDS}")
    if name == "numba" and not _numba_available():
        log.warning("numba not importable, falling back to the numpy kernel")
        name = "numpy"
    return name


def march_kernel(name=None):
    name = resolve(name)
    if name == "numba":
        from ._kernels_jit import march
    else:
        from ._kernels_np import march
    return name, march
