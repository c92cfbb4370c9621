"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise the pure-Python
module is imported. Setting ``CRGSCORE_PURE_PYTHON=1`` forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np

if os.environ.get("CRGSCORE_PURE_PYTHON", "").strip() not in ("", "0"):
    from crgscore import _pykernels as _impl

    BACKEND = "python"
else:
    try:
        from crgscore import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        from crgscore import _pykernels as _impl

        BACKEND = "python"


def confusion_counts(
    pred: np.ndarray, ref: np.ndarray, mask: np.ndarray | None = None
) -> np.ndarray:
    """Per-label ``[tp, fn, fp, tn]`` rows for uint8 prediction/reference arrays."""
    return _impl.confusion_counts(pred, ref, mask)


def lcs_length(a: np.ndarray, b: np.ndarray) -> int:
    """LCS length of two int64 token-id arrays."""
    return int(_impl.lcs_length(a, b))
