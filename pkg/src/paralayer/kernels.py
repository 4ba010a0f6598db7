"""Backend selection for the tridiagonal Sturm kernels.

The compiled extension is used when it imports; otherwise the pure-Python
implementation is used.  Set ``PARALAYER_PURE_PYTHON=1`` to force the
fallback (the benchmark does this in a subprocess).
"""

import os

from . import _sturm_py

BACKEND = "python"
_ext = None

if os.environ.get("PARALAYER_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _sturm as _ext  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _ext = None

_impl = _ext if _ext is not None else _sturm_py

sturm_count = _impl.sturm_count
sturm_count_many = _impl.sturm_count_many
bisect_kth = _impl.bisect_kth


def python_backend():
    """Return the pure-Python kernel module regardless of the active backend."""
    return _sturm_py


def compiled_backend():
    """Return the compiled kernel module, or None if it is not available."""
    return _ext
