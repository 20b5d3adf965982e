"""Select the compiled kernels when built, else the pure-Python reference.

Set ``STEINBETA_PURE=1`` to force the pure-Python path.
"""

import os

if os.environ.get("STEINBETA_PURE") == "1":
    from . import _kernels_py as kernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[attr-defined]
        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels
        BACKEND = "python"

__all__ = ["kernels", "BACKEND"]
