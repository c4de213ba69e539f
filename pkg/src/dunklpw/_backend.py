"""Select the compiled kernel core when available, else the numpy fallback.

Set ``DUNKLPW_PURE_PYTHON=1`` to force the fallback.  ``DUNKLPW_THREADS``
caps the number of threads used by the compiled core (default 1).
"""

import os

from . import _kernel_py

_impl = _kernel_py
BACKEND = "python"

if not os.environ.get("DUNKLPW_PURE_PYTHON"):
    try:
        from . import _ckernel as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass


def thread_count():
    try:
        return max(1, int(os.environ.get("DUNKLPW_THREADS", "1")))
    except ValueError:
        return 1


psi = _impl.psi
eval_axis = _impl.eval_axis
matvec_axis = _impl.matvec_axis
matvec_general = _impl.matvec_general

# shared, not hot
axis_table = _kernel_py.axis_table
kernel_parts = _kernel_py.kernel_parts
series_parts = _kernel_py.series_parts
check_range = _kernel_py.check_range


def backends():
    """Both implementations keyed by name, for benchmarks and tests."""
    found = {"python": _kernel_py}
    try:
        from . import _ckernel
        found["cython"] = _ckernel
    except ImportError:
        pass
    return found
