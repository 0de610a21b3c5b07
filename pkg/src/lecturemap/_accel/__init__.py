"""Kernel backend selection.

Imports the compiled Cython kernels when the extension was built, otherwise
falls back to the pure-numpy twins.  Set ``LECTUREMAP_PURE=1`` to force the
fallback (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

if os.environ.get("LECTUREMAP_PURE") == "1":
    from ._pure import BACKEND, emd_1d_consecutive, gibbs_sweep
else:
    try:
        from ._core import BACKEND, emd_1d_consecutive, gibbs_sweep
    except ImportError:
        from ._pure import BACKEND, emd_1d_consecutive, gibbs_sweep

__all__ = ["BACKEND", "emd_1d_consecutive", "gibbs_sweep"]
