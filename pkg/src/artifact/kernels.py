"""Kernel dispatch: compiled extension when importable, numpy otherwise.

Set ARTIFACT_PURE_PYTHON=1 to force the numpy path.
"""

import os

if os.environ.get("ARTIFACT_PURE_PYTHON"):
    from ._kernels_py import comb_sum, gauss_sum
    BACKEND = "python"
else:
    try:
        from ._kernels import comb_sum, gauss_sum
        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import comb_sum, gauss_sum
        BACKEND = "python"

__all__ = ["gauss_sum", "comb_sum", "BACKEND"]
