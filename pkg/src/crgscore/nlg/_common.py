from __future__ import annotations

from collections import Counter
from typing import Sequence, Union

from crgscore.nlg.tokenize import TokenizedReport, tokenize_text

Tokens = Sequence[str]
ReportLike = Union[str, TokenizedReport, Sequence[str]]


class CorpusError(ValueError):
    pass


def as_tokens(item: ReportLike) -> tuple[str, ...]:
    if isinstance(item, str):
        return tokenize_text(item)
    if isinstance(item, TokenizedReport):
        return item.tokens
    if isinstance(item, (list, tuple)) and item and isinstance(item[0], (list, tuple)):
        raise CorpusError("multi-reference input is not supported; pass one reference per sample")
    return tuple(item)


def as_corpus(
    candidates: Sequence[ReportLike], references: Sequence[ReportLike]
) -> tuple[list[tuple[str, ...]], list[tuple[str, ...]]]:
    if len(candidates) != len(references):
        raise CorpusError(
            f"corpora differ in length: {len(candidates)} candidates, {len(references)} references"
        )
    if not candidates:
        raise CorpusError("empty corpus")
    return [as_tokens(c) for c in candidates], [as_tokens(r) for r in references]


def ngrams(tokens: Tokens, n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
