"""Kernel backend selection.

The compiled extension is used when importable; set ``GAPEDGE_PURE_PYTHON=1``
to force the pure-Python fallback (the benchmark and the parity tests do).
"""

import os

from . import _kernels_py

_force_python = os.environ.get("GAPEDGE_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND_NAME

sturm_counts = _impl.sturm_counts
pruefer_count = _impl.pruefer_count
dirac_shoot = _impl.dirac_shoot
