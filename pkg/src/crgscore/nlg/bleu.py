"""Corpus-level BLEU."""

from __future__ import annotations

import math
from typing import Sequence

from crgscore.nlg._common import ReportLike, as_corpus, ngrams


def bleu(
    candidates: Sequence[ReportLike],
    references: Sequence[ReportLike],
    max_n: int = 4,
    epsilon: float | None = None,
) -> float:
    """Clipped n-gram precision, geometric mean over orders ``1..max_n``, times brevity penalty.

    Counts are pooled over the corpus before dividing. Without ``epsilon`` a
    zero precision at any order makes the score 0; with it, zero matched counts
    are replaced by ``epsilon``.
    """
    if not 1 <= max_n <= 4:
        raise ValueError(f"max_n must be in 1..4, got {max_n}")
    cands, refs = as_corpus(candidates, references)
    matched = [0] * max_n
    total = [0] * max_n
    cand_len = ref_len = 0
    for c, r in zip(cands, refs):
        cand_len += len(c)
        ref_len += len(r)
        for n in range(1, max_n + 1):
            cg, rg = ngrams(c, n), ngrams(r, n)
            matched[n - 1] += sum(min(cnt, rg[g]) for g, cnt in cg.items())
            total[n - 1] += max(len(c) - n + 1, 0)
    if cand_len == 0:
        return 0.0
    log_p = 0.0
    for m, t in zip(matched, total):
        if t == 0:
            return 0.0
        if m == 0:
            if epsilon is None:
                return 0.0
            m = epsilon
        log_p += math.log(m / t)
    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    return bp * math.exp(log_p / max_n)
