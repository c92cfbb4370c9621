"""CIDEr-D with document frequencies taken from the reference corpus."""

from __future__ import annotations

import math
import warnings
from collections import Counter, defaultdict
from typing import Sequence

from crgscore.nlg._common import ReportLike, Tokens, as_corpus, ngrams


def _vectors(tokens: Tokens, max_n: int, df: Counter, log_n_docs: float):
    vecs: list[dict[tuple[str, ...], float]] = []
    norms: list[float] = []
    for n in range(1, max_n + 1):
        vec = {
            g: tf * (log_n_docs - math.log(max(1.0, df[g]))) for g, tf in ngrams(tokens, n).items()
        }
        vecs.append(vec)
        norms.append(math.sqrt(sum(v * v for v in vec.values())))
    return vecs, norms


def cider_scores(
    candidates: Sequence[ReportLike],
    references: Sequence[ReportLike],
    max_n: int = 4,
    sigma: float = 6.0,
) -> list[float]:
    """Per-pair CIDEr-D values (already multiplied by 10)."""
    cands, refs = as_corpus(candidates, references)
    df: Counter = Counter()
    for r in refs:
        seen = set()
        for n in range(1, max_n + 1):
            seen.update(ngrams(r, n))
        df.update(seen)
    n_docs = len(refs)
    if n_docs == 1:
        warnings.warn(
            "CIDEr on a single document: every n-gram has zero IDF; "
            "smoothing the document count to 2",
            RuntimeWarning,
            stacklevel=2,
        )
        log_n_docs = math.log(2.0)
    else:
        log_n_docs = math.log(float(n_docs))

    scores = []
    for c, r in zip(cands, refs):
        vh, nh = _vectors(c, max_n, df, log_n_docs)
        vr, nr = _vectors(r, max_n, df, log_n_docs)
        delta = float(len(c) - len(r))
        damp = math.exp(-(delta**2) / (2 * sigma**2))
        total = 0.0
        for n in range(max_n):
            ref_vec = defaultdict(float, vr[n])
            val = sum(min(h, ref_vec[g]) * ref_vec[g] for g, h in vh[n].items())
            if nh[n] != 0 and nr[n] != 0:
                val /= nh[n] * nr[n]
            total += val * damp
        scores.append(total / max_n * 10.0)
    return scores


def cider(
    candidates: Sequence[ReportLike],
    references: Sequence[ReportLike],
    max_n: int = 4,
    sigma: float = 6.0,
) -> float:
    scores = cider_scores(candidates, references, max_n, sigma)
    return sum(scores) / len(scores)
