"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled extension is used when it was built and ``GENCAP_PURE_PYTHON``
is unset (or ``0``).  Both backends expose the same two functions.
"""

import os

from gencap import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("GENCAP_PURE_PYTHON", "0") in ("", "0"):
    try:
        from gencap import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        pass

logsumexp_grid = _impl.logsumexp_grid
support_sums = _impl.support_sums

__all__ = ["BACKEND", "logsumexp_grid", "support_sums"]
