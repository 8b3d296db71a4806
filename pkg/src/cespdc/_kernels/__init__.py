"""Numeric kernels with a compiled fast path and a numpy fallback.

Set CESPDC_PURE_PYTHON=1 to force the fallback (useful for debugging and for
benchmarking the two against each other).
"""

from __future__ import annotations

import os

if os.environ.get("CESPDC_PURE_PYTHON"):
    from ._slow import BACKEND, airy, bin_pairs, comb_factor, pair_overlap
else:
    try:
        from ._fast import BACKEND, airy, bin_pairs, comb_factor, pair_overlap
    except ImportError:
        from ._slow import BACKEND, airy, bin_pairs, comb_factor, pair_overlap

__all__ = ["BACKEND", "airy", "bin_pairs", "comb_factor", "pair_overlap"]
