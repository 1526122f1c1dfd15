"""Backend selection for the hot loops.

The compiled extension is preferred; set ``WEIGHTCASTER_PURE_PYTHON=1`` to force
the numpy fallback (used by the benchmark and the parity tests).
"""

import os

from . import _kernels_py

BACKEND = "python"

if not os.environ.get("WEIGHTCASTER_PURE_PYTHON"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

rollout = _impl.rollout
rollout_adjoint = _impl.rollout_adjoint
ring_objective = _impl.ring_objective

__all__ = ["BACKEND", "rollout", "rollout_adjoint", "ring_objective"]
