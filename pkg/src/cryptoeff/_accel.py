"""Numba switch for the hot kernels.

Set ``CRYPTOEFF_DISABLE_NUMBA=1`` to run every kernel as plain Python over
numpy arrays. Results are identical either way; only speed differs.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None

DISABLED = os.environ.get("CRYPTOEFF_DISABLE_NUMBA", "0").strip().lower() in ("1", "true", "yes")
HAS_NUMBA = numba is not None and not DISABLED


def jit(fn):
    """Compile ``fn`` with ``numba.njit`` when available, else return it as is.

    The uncompiled function stays reachable as ``fn.py_func`` in both modes so
    benchmarks and equivalence tests can call the fallback explicitly.
    """
    if HAS_NUMBA:
        return numba.njit(cache=True)(fn)
    fn.py_func = fn
    return fn
