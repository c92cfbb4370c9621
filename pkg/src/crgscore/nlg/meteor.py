"""METEOR with exact and Porter-stem unigram matching (no synonym stage)."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable, Sequence

from nltk.stem.porter import PorterStemmer

from crgscore.nlg._common import ReportLike, Tokens, as_corpus

_stemmer = PorterStemmer()


@lru_cache(maxsize=65536)
def _stem(word: str) -> str:
    return _stemmer.stem(word)


def align(candidate: Tokens, reference: Tokens) -> list[tuple[int, int]]:
    """Unigram alignment as sorted ``(candidate_idx, reference_idx)`` pairs.

    Exact matches are taken first, then stem matches among the leftovers. Within
    a stage each candidate word takes the reference slot right after its
    predecessor's match when that slot fits, otherwise the leftmost free slot.
    """
    used_c: set[int] = set()
    used_r: set[int] = set()
    pairs: dict[int, int] = {}
    stages: list[Callable[[str], str]] = [lambda w: w, _stem]
    for form in stages:
        ref_forms = [form(w) for w in reference]
        for i, word in enumerate(candidate):
            if i in used_c:
                continue
            key = form(word)
            want = pairs.get(i - 1, -2) + 1
            slot = None
            if 0 <= want < len(reference) and want not in used_r and ref_forms[want] == key:
                slot = want
            else:
                for j, rf in enumerate(ref_forms):
                    if j not in used_r and rf == key:
                        slot = j
                        break
            if slot is not None:
                pairs[i] = slot
                used_c.add(i)
                used_r.add(slot)
    return sorted(pairs.items())


def count_chunks(alignment: Sequence[tuple[int, int]]) -> int:
    chunks = 0
    prev: tuple[int, int] | None = None
    for ci, ri in alignment:
        if prev is None or ci != prev[0] + 1 or ri != prev[1] + 1:
            chunks += 1
        prev = (ci, ri)
    return chunks


def meteor_pair(
    candidate: Tokens,
    reference: Tokens,
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    alignment = align(candidate, reference)
    m = len(alignment)
    if m == 0:
        return 0.0
    precision = m / len(candidate)
    recall = m / len(reference)
    fmean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    chunks = count_chunks(alignment)
    if chunks == 1 and m == len(candidate) == len(reference):
        frag = 0.0  # identical word order over the whole segment
    else:
        frag = chunks / m
    return fmean * (1.0 - gamma * frag**beta)


def meteor(
    candidates: Sequence[ReportLike],
    references: Sequence[ReportLike],
    alpha: float = 0.9,
    beta: float = 3.0,
    gamma: float = 0.5,
) -> float:
    """Mean per-pair METEOR."""
    cands, refs = as_corpus(candidates, references)
    total = sum(meteor_pair(c, r, alpha, beta, gamma) for c, r in zip(cands, refs))
    return total / len(cands)
