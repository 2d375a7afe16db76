"""Back-end selection for the hot kernels.

The compiled extension is used when it imports; ``SPHERELAB_PURE=1`` forces
the NumPy fallback.  ``BACKEND`` names the active implementation.
"""
import os

from . import _kernels_py

if os.environ.get("SPHERELAB_PURE", "") not in ("", "0"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        _impl = _kernels_py

BACKEND = "compiled" if _impl is not _kernels_py else "python"

interp = _impl.interp
translate_sum = _impl.translate_sum
translate_sum_pair = _impl.translate_sum_pair
greedy_net = _impl.greedy_net
