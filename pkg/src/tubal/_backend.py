"""Kernel backend selection.

The hot assembly loops exist in two versions: a numba ``@njit`` kernel and a
vectorised numpy twin.  ``TUBAL_BACKEND=numpy`` forces the numpy path;
otherwise numba is used when it imports.  ``TUBAL_THREADS`` caps the number
of numba worker threads.
"""
import os
import warnings

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None

if HAVE_NUMBA and "NUMBA_THREADING_LAYER" not in os.environ:
    # the system TBB is too old for numba and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

_requested = os.environ.get("TUBAL_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    warnings.warn(f"unknown TUBAL_BACKEND={_requested!r}, using default")
    _requested = ""
if _requested == "numba" and not HAVE_NUMBA:
    warnings.warn("TUBAL_BACKEND=numba requested but numba is not installed")
    _requested = "numpy"

_active = _requested or ("numba" if HAVE_NUMBA else "numpy")

if HAVE_NUMBA and os.environ.get("TUBAL_THREADS"):
    numba.set_num_threads(max(1, min(int(os.environ["TUBAL_THREADS"]), numba.config.NUMBA_NUM_THREADS)))


def get_backend():
    return _active


def set_backend(name):
    """Switch the kernel backend at runtime (``"numba"`` or ``"numpy"``)."""
    global _active
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _active = name
