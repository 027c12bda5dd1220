"""Backend selection for the hot kernels.

The compiled Cython extension is used when present; setting
``ACTIVETEST_PURE=1`` forces the pure-Python implementation.
"""

from __future__ import annotations

import os

if os.environ.get("ACTIVETEST_PURE"):
    from . import _kernel_py as _backend

    BACKEND = "pure"
else:
    try:
        from . import _kernel as _backend  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernel_py as _backend

        BACKEND = "pure"

propagate = _backend.propagate
solve = _backend.solve
simulate = _backend.simulate
