"""Kernel backend dispatch.

The compiled core is preferred when it imported cleanly; otherwise the numpy
fallback is used.  CTNS_KERNELS=auto|cython|numpy (read once at import time)
overrides the choice; asking for the compiled core when it is unavailable is
an import error rather than a silent downgrade.

Elementwise kernels produce bitwise identical results on both backends; the
reduction kernels (used only for diagnostics and step-size guards) may differ
at roundoff.
"""

from __future__ import annotations

import os

_requested = os.environ.get("CTNS_KERNELS", "auto").lower()
if _requested not in ("auto", "cython", "numpy"):
    raise ImportError(
        f"CTNS_KERNELS must be 'auto', 'cython' or 'numpy', got {_requested!r}"
    )

if _requested in ("auto", "cython"):
    try:
        from . import _core as _impl

        _BACKEND = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _numpy_impl as _impl

        _BACKEND = "numpy"
else:
    from . import _numpy_impl as _impl

    _BACKEND = "numpy"


def backend() -> str:
    """Name of the active kernel backend: 'cython' or 'numpy'."""
    return _BACKEND


semigroup_apply = _impl.semigroup_apply
semigroup_combine = _impl.semigroup_combine
semigroup_combine_noise = _impl.semigroup_combine_noise
spectral_gradient = _impl.spectral_gradient
flux_divergence = _impl.flux_divergence
masked_scale = _impl.masked_scale
leray_project = _impl.leray_project
multiply = _impl.multiply
transport_flux = _impl.transport_flux
vector_max = _impl.vector_max
scaled_vector_max = _impl.scaled_vector_max
nlogn_sum = _impl.nlogn_sum
hessian_defect_sum = _impl.hessian_defect_sum
quartic_cross_sums = _impl.quartic_cross_sums

__all__ = [
    "backend",
    "semigroup_apply",
    "semigroup_combine",
    "semigroup_combine_noise",
    "spectral_gradient",
    "flux_divergence",
    "masked_scale",
    "leray_project",
    "multiply",
    "transport_flux",
    "vector_max",
    "scaled_vector_max",
    "nlogn_sum",
    "hessian_defect_sum",
    "quartic_cross_sums",
]
