"""Numba dispatch switch.

Set ``PROPERCLOCK_DISABLE_NUMBA=1`` to force the pure-numpy kernels, and
``PROPERCLOCK_THREADS=<n>`` to cap the number of numba worker threads.
"""
import os
import warnings


def _flag(name):
    return os.environ.get(name, "").strip().lower() in ("1", "true", "yes", "on")


try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
    if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
        # try OpenMP first; old system TBB builds only produce a warning
        numba.config.THREADING_LAYER_PRIORITY = ["omp", "tbb", "workqueue"]
except ImportError:  # pragma: no cover - numba is a declared dependency
    warnings.warn("numba is not installed - falling back to numpy kernels")
    HAVE_NUMBA = False
    prange = range

    def njit(*args, **kw):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


USE_NUMBA = HAVE_NUMBA and not _flag("PROPERCLOCK_DISABLE_NUMBA")


def thread_cap():
    """Parallelism cap from ``PROPERCLOCK_THREADS`` (None when unset)."""
    raw = os.environ.get("PROPERCLOCK_THREADS")
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"PROPERCLOCK_THREADS must be an integer, got {raw!r}")
    if n < 1:
        raise ValueError("PROPERCLOCK_THREADS must be >= 1")
    return n


def apply_thread_cap():
    n = thread_cap()
    if n is not None and HAVE_NUMBA:
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
    return n
