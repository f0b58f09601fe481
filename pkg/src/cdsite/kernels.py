"""Kernel selection: compiled extension when available, pure Python otherwise.

Set CDSITE_FORCE_PURE=1 to skip the compiled module (used by the parity tests
and the benchmark).
"""

from __future__ import annotations

import os

if os.environ.get("CDSITE_FORCE_PURE"):
    from . import _kernels_pure as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_pure as _impl

IMPLEMENTATION = _impl.IMPLEMENTATION

up_closure = _impl.up_closure
down_closure = _impl.down_closure
is_up_set = _impl.is_up_set
all_up_sets = _impl.all_up_sets
point_heights = _impl.point_heights
monotone_maps = _impl.monotone_maps
is_monotone = _impl.is_monotone
image_mask = _impl.image_mask
preimage_mask = _impl.preimage_mask
is_etale_like = _impl.is_etale_like
lifts_specializations = _impl.lifts_specializations
is_separated_like = _impl.is_separated_like
is_proper_like = _impl.is_proper_like
