"""Backend selection for the numeric kernels.

The compiled extension is used when it imports; otherwise the pure-Python
twin is used. Set ``ZTSEG_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os

from . import _kernels_py

_compiled = None
if os.environ.get("ZTSEG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled  # type: ignore[attr-defined]
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py

BACKEND: str = "compiled" if _compiled is not None else "python"

haversine_km = _impl.haversine_km
welford_update = _impl.welford_update
mahalanobis_sq = _impl.mahalanobis_sq
assign_nearest = _impl.assign_nearest


def backends() -> dict:
    """Map of available backend name -> module, for benchmarks and tests."""
    out = {"python": _kernels_py}
    if _compiled is not None:
        out["compiled"] = _compiled
    return out
