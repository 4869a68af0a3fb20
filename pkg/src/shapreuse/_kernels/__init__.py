"""Vote kernels with import-time backend selection.

The compiled extension is preferred; the numpy fallback is used when the
extension is missing or when SHAPREUSE_PURE=1 is set in the environment.
"""

import os

if os.environ.get("SHAPREUSE_PURE") == "1":
    from .fallback import kernel_votes, wknn_votes

    BACKEND = "python"
else:
    try:
        from ._speedups import kernel_votes, wknn_votes

        BACKEND = "compiled"
    except ImportError:
        from .fallback import kernel_votes, wknn_votes

        BACKEND = "python"

__all__ = ["BACKEND", "kernel_votes", "wknn_votes"]
