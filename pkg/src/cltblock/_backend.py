"""Kernel backend selection.

The hot loops (live-path breadth-first activation, threshold simulation,
LDAG construction and the CLDAG dynamic program) are written in a
numba-compatible subset of Python.  ``CLTBLOCK_BACKEND`` picks how they run:

``numba`` (default)
    kernels are compiled with ``numba.njit(cache=True)``.
``numpy``
    numba is never imported; Monte-Carlo estimators switch to vectorised
    numpy implementations and the graph kernels run as plain Python.

The flag is read once, at import time.
"""

from __future__ import annotations

import os

ENV_VAR = "CLTBLOCK_BACKEND"

_requested = os.environ.get(ENV_VAR, "numba").strip().lower() or "numba"
if _requested not in ("numba", "numpy"):
    raise ValueError(f"{ENV_VAR} must be 'numba' or 'numpy', got {_requested!r}")

numba = None
if _requested == "numba":
    try:
        import numba  # noqa: F811
    except ImportError:  # pragma: no cover - numba is a declared dependency
        numba = None

BACKEND = "numba" if numba is not None else "numpy"
USE_NUMBA = BACKEND == "numba"


def jit(fn):
    """Compile ``fn`` with numba when the numba backend is active."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
