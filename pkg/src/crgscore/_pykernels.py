"""Pure-Python fallbacks for the compiled kernels in ``_ckernels.pyx``."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def confusion_counts(
    pred: np.ndarray, ref: np.ndarray, mask: np.ndarray | None = None
) -> np.ndarray:
    p = np.asarray(pred) != 0
    r = np.asarray(ref) != 0
    keep = np.ones_like(p) if mask is None else np.asarray(mask) != 0
    out = np.empty((p.shape[1], 4), dtype=np.int64)
    out[:, 0] = (r & p & keep).sum(axis=0)
    out[:, 1] = (r & ~p & keep).sum(axis=0)
    out[:, 2] = (~r & p & keep).sum(axis=0)
    out[:, 3] = (~r & ~p & keep).sum(axis=0)
    return out


def lcs_length(a: Sequence[int], b: Sequence[int]) -> int:
    a, b = list(a), list(b)
    if len(b) > len(a):
        a, b = b, a
    if not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            if x == y:
                cur.append(prev[j] + 1)
            else:
                cur.append(prev[j + 1] if prev[j + 1] >= cur[j] else cur[j])
        prev = cur
    return prev[-1]
