"""JIT selection and worker-count configuration.

Set ``PROPERDIV_DISABLE_JIT=1`` before import to force the pure-numpy
kernels. ``PROPERDIV_THREADS`` caps the number of workers used by the
parallel kernels and the grid pipeline.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_JIT = HAVE_NUMBA and os.environ.get("PROPERDIV_DISABLE_JIT", "").lower() not in _TRUTHY

if USE_JIT and "NUMBA_THREADING_LAYER" not in os.environ:
    # the bundled TBB is often too old and only produces a warning
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def worker_count():
    """Number of workers allowed by ``PROPERDIV_THREADS`` (default: all cores)."""
    raw = os.environ.get("PROPERDIV_THREADS", "").strip()
    n_cpu = os.cpu_count() or 1
    if not raw:
        return n_cpu
    try:
        n = int(raw)
    except ValueError:
        return n_cpu
    return max(1, n)


def configure_threads():
    if USE_JIT:
        n = min(worker_count(), numba.config.NUMBA_NUM_THREADS)
        numba.set_num_threads(max(1, n))


if USE_JIT:
    def njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        return numba.njit(*args, **kwargs)

    prange = numba.prange
else:
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

    prange = range
