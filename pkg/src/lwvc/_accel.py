"""Backend selection for the hot kernels.

Every kernel module defines a numba version and a pure-numpy version of
its inner loops and binds the public name according to ``USE_NUMBA``.
Set ``LWVC_BACKEND=numpy`` in the environment to force the fallback
(the default is ``numba`` when it can be imported).
"""

import os

BACKEND = os.environ.get("LWVC_BACKEND", "numba").strip().lower()
if BACKEND not in ("numba", "numpy"):
    raise ImportError(f"LWVC_BACKEND must be 'numba' or 'numpy', got {BACKEND!r}")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = BACKEND == "numba" and numba is not None


def njit(fn):
    """Compile ``fn`` with numba on the numba backend, else return it unchanged.

    Loop kernels stay callable as plain Python on the numpy backend, which is
    how the entropy coder (inherently sequential) runs there.
    """
    if not USE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def pick(numba_impl, numpy_impl):
    return numba_impl if USE_NUMBA else numpy_impl
