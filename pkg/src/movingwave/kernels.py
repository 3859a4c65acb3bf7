"""Backend selection for the hot loops.

The compiled extension is used when it is importable, unless the
environment variable ``MOVINGWAVE_PURE_PYTHON`` is set to ``1``.
"""
import os

from . import _kernels_py

BACKEND = "python"
three_level_sweep = _kernels_py.three_level_sweep

if os.environ.get("MOVINGWAVE_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels
    except ImportError:  # extension not built
        pass
    else:
        three_level_sweep = _kernels.three_level_sweep
        BACKEND = "cython"

BACKENDS = {"python": _kernels_py.three_level_sweep}
try:
    from . import _kernels as _compiled
    BACKENDS["cython"] = _compiled.three_level_sweep
except ImportError:
    pass
