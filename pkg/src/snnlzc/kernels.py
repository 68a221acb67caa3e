"""Backend selection for the hot kernels.

The compiled extension (``snnlzc._kernels``) is preferred; the pure-Python
twin (``snnlzc._kernels_py``) is used when the extension is missing or when
the environment variable ``SNNLZC_BACKEND=python`` forces it.  Both expose
the same three functions with identical semantics.
"""

from __future__ import annotations

import os

if os.environ.get("SNNLZC_BACKEND", "").lower() == "python":
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND: str = _impl.BACKEND
lz76_starts_lengths = _impl.lz76_starts_lengths
simulate_layer = _impl.simulate_layer
stdp_accumulate = _impl.stdp_accumulate

__all__ = ["BACKEND", "lz76_starts_lengths", "simulate_layer", "stdp_accumulate"]
