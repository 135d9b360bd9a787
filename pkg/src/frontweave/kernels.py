"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; set ``FRONTWEAVE_PURE=1``
to force the pure-Python versions.
"""
import os

from . import _pykernels

_names = (
    "fmm_update",
    "quadrant_minimize",
    "quartic_coeffs",
    "upw",
    "sideways_row",
    "scheme_g",
    "xi_scan_min",
    "godunov_norm",
)

BACKEND = "python"
_impl = _pykernels
if os.environ.get("FRONTWEAVE_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pykernels

fmm_update = _impl.fmm_update
quadrant_minimize = _impl.quadrant_minimize
quartic_coeffs = _impl.quartic_coeffs
upw = _impl.upw
sideways_row = _impl.sideways_row
scheme_g = _impl.scheme_g
xi_scan_min = _impl.xi_scan_min
godunov_norm = _impl.godunov_norm

__all__ = ["BACKEND", *_names]
