"""Hot inner loops with two interchangeable backends.

``RELEX_BACKEND=numpy`` forces the pure-numpy path; the default is numba
when it imports cleanly. BFS and Cheeger results are identical across
backends (ties break to the smallest subset mask); pair profiles agree to
rounding.
"""
import os

from . import _numpy as numpy_impl

BACKEND = os.environ.get("RELEX_BACKEND", "numba").strip().lower()

numba_impl = None
if BACKEND != "numpy":
    try:
        from . import _numba as numba_impl
    except ImportError:  # pragma: no cover - numba is a hard dependency in CI
        numba_impl = None
        BACKEND = "numpy"

_impl = numba_impl if BACKEND == "numba" else numpy_impl

bfs_csr = _impl.bfs_csr
all_pairs_csr = _impl.all_pairs_csr
cheeger_exhaustive = _impl.cheeger_exhaustive
pair_profile = _impl.pair_profile

__all__ = [
    "BACKEND",
    "numpy_impl",
    "numba_impl",
    "bfs_csr",
    "all_pairs_csr",
    "cheeger_exhaustive",
    "pair_profile",
]
