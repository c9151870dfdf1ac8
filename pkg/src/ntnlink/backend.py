"""Hot-kernel backend selection.

Every hot kernel exists twice: a numba @njit build (`_kernels_numba`) and a
pure-numpy fallback (`_kernels_numpy`). The env var NTNLINK_BACKEND picks one:

    NTNLINK_BACKEND=numpy   force the fallback
    NTNLINK_BACKEND=numba   require numba (ImportError if unavailable)
    unset                   numba when importable, numpy otherwise

`benchmarks/bench_backends.py` times the two side by side.
"""

import os

from ntnlink.errors import ConfigurationError

_requested = os.environ.get("NTNLINK_BACKEND", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ConfigurationError(
        f"NTNLINK_BACKEND must be 'numba' or 'numpy', got {_requested!r}"
    )

if _requested == "numpy":
    from ntnlink import _kernels_numpy as kernels

    BACKEND = "numpy"
elif _requested == "numba":
    from ntnlink import _kernels_numba as kernels

    BACKEND = "numba"
else:
    try:
        from ntnlink import _kernels_numba as kernels

        BACKEND = "numba"
    except ImportError:
        from ntnlink import _kernels_numpy as kernels

        BACKEND = "numpy"

__all__ = ["kernels", "BACKEND"]
