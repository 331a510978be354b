"""Select the compiled kernels when available, else the numpy fallback.

Set ``G2LAB_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
by the test-suite to exercise both paths).
"""

import os

from . import _kernels_py

BACKEND = "python"
kernels = _kernels_py

if os.environ.get("G2LAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # pragma: no cover - depends on build
        pass
    else:
        kernels = _compiled
        BACKEND = "cython"
