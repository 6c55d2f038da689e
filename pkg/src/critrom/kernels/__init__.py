"""Numerical kernels with a compiled fast path and a pure-Python fallback.

The Gauss-Seidel sweeps and Jacobi rotations are sequential recurrences that
numpy cannot vectorise, so they are implemented twice: once in Cython
(``_ckernels``, built at install time) and once in plain Python/numpy
(``_pykernels``).  The compiled extension is selected at import when
available; set ``CRITROM_PURE_PYTHON=1`` to force the fallback.  Both
backends implement the same algorithms with the same update ordering;
floating-point results may differ in the last bits where numpy reductions
are involved.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("CRITROM_PURE_PYTHON", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        pass

gs_banded_sweep = _impl.gs_banded_sweep
gs_dense_sweep = _impl.gs_dense_sweep
stencil_matvec = _impl.stencil_matvec
jacobi_sweep = _impl.jacobi_sweep

__all__ = [
    "BACKEND",
    "gs_banded_sweep",
    "gs_dense_sweep",
    "stencil_matvec",
    "jacobi_sweep",
]
