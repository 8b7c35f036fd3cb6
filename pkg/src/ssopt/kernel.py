"""Search-kernel backend chosen at import.

The compiled extension is used when it was built and ``SSOPT_PURE_PYTHON``
is unset; otherwise the pure-Python kernel runs. Both produce bit-identical
results. Instances too large for exact int64 arithmetic always use the
Python kernel.
"""

import os

from . import _kernel_py

try:
    if os.environ.get("SSOPT_PURE_PYTHON"):
        raise ImportError("pure-Python kernel forced by SSOPT_PURE_PYTHON")
    from . import _kernel as _native
except ImportError:
    _native = None

BACKEND = "cython" if _native is not None else "python"


def backend_for(ci):
    if _native is not None and ci.native_safe and ci.capacity.shape[1] < 2048:
        return _native
    return _kernel_py


def evaluate(ci, ranks):
    return backend_for(ci).evaluate(ci, ranks)


def run_chain(ci, ranks0, **kw):
    return backend_for(ci).run_chain(ci, ranks0, **kw)
