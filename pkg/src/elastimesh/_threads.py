"""Optional cap on BLAS parallelism via the ELASTIMESH_THREADS variable.

Must run before numpy first touches its BLAS backend, so the package
__init__ calls this before any numeric import.  Existing explicit settings
are left alone.
"""

import os

_BLAS_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
)


def apply_thread_cap() -> None:
    cap = os.environ.get("ELASTIMESH_THREADS")
    if not cap:
        return
    try:
        n = max(1, int(cap))
    except ValueError:
        return
    for var in _BLAS_VARS:
        os.environ.setdefault(var, str(n))
