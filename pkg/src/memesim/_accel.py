"""Backend selection for the compiled kernels.

Set ``MEMESIM_BACKEND=numpy`` to force the pure-numpy code paths. The default
is ``numba`` when numba imports cleanly, otherwise ``numpy``.
"""
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional at runtime
    numba = None

BACKENDS = ("numba", "numpy")
HAVE_NUMBA = numba is not None


def _default_backend():
    requested = os.environ.get("MEMESIM_BACKEND", "").strip().lower()
    if requested == "numpy":
        return "numpy"
    if requested not in ("", "numba"):
        raise ValueError(f"MEMESIM_BACKEND must be one of {BACKENDS}, got {requested!r}")
    return "numba" if HAVE_NUMBA else "numpy"


DEFAULT_BACKEND = _default_backend()


def resolve(backend=None):
    """Return the backend name to use for a call, validating explicit requests."""
    if backend is None:
        return DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"backend must be one of {BACKENDS}, got {backend!r}")
    if backend == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba backend requested but numba is not installed")
    return backend


def njit(func):
    """``numba.njit(cache=True, nogil=True)`` when available, identity otherwise."""
    if numba is None:
        return func
    return numba.njit(cache=True, nogil=True)(func)
