"""Backend selection for the hot loops.

The compiled extension is used when importable; setting the environment
variable ``DPII_PURE_PYTHON=1`` forces the pure-Python reference path.
"""
import os

from . import _pykernels

if os.environ.get("DPII_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

REACHED, POLE, ZERO, BLOWUP, STEPFAIL, MAXSTEPS = (
    _pykernels.REACHED, _pykernels.POLE, _pykernels.ZERO,
    _pykernels.BLOWUP, _pykernels.STEPFAIL, _pykernels.MAXSTEPS)

rk_integrate = _impl.rk_integrate
thomas = _impl.thomas
