"""ROUGE-L F-measure."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from crgscore import kernels
from crgscore.nlg._common import ReportLike, Tokens, as_corpus


def lcs(a: Tokens, b: Tokens) -> int:
    vocab: dict[str, int] = {}
    ia = np.fromiter((vocab.setdefault(t, len(vocab)) for t in a), dtype=np.int64, count=len(a))
    ib = np.fromiter((vocab.setdefault(t, len(vocab)) for t in b), dtype=np.int64, count=len(b))
    return kernels.lcs_length(ia, ib)


def rouge_l_pair(candidate: Tokens, reference: Tokens, beta: float = 1.2) -> float:
    if not candidate or not reference:
        return 0.0
    common = lcs(candidate, reference)
    if common == 0:
        return 0.0
    p = common / len(candidate)
    r = common / len(reference)
    return (1 + beta**2) * p * r / (r + beta**2 * p)


def rouge_l(
    candidates: Sequence[ReportLike], references: Sequence[ReportLike], beta: float = 1.2
) -> float:
    """Mean per-pair LCS F-measure; ``beta`` weights recall over precision."""
    cands, refs = as_corpus(candidates, references)
    return sum(rouge_l_pair(c, r, beta) for c, r in zip(cands, refs)) / len(cands)
