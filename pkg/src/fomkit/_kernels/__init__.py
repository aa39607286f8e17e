"""Hot numerical kernels with a compiled backend and a NumPy fallback.

The Cython extension is used when it was built and imported cleanly; setting
``FOMKIT_PURE_PYTHON=1`` forces the NumPy versions.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("FOMKIT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

project_simplex = _impl.project_simplex
entropy_step = _impl.entropy_step
nesterov_skokov = _impl.nesterov_skokov
chain_quadratic = _impl.chain_quadratic
ENTROPY_FLOOR = _pykernels.ENTROPY_FLOOR

__all__ = [
    "BACKEND",
    "ENTROPY_FLOOR",
    "chain_quadratic",
    "entropy_step",
    "nesterov_skokov",
    "project_simplex",
]
