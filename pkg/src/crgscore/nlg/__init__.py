"""Text-overlap baselines: BLEU-1..4, ROUGE-L, METEOR and CIDEr-D."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

from crgscore.nlg._common import CorpusError, ReportLike, as_corpus
from crgscore.nlg.bleu import bleu
from crgscore.nlg.cider import cider, cider_scores
from crgscore.nlg.meteor import meteor, meteor_pair
from crgscore.nlg.rouge import lcs, rouge_l, rouge_l_pair
from crgscore.nlg.tokenize import TOKENIZER_VERSION, TokenizedReport, tokenize, tokenize_text


@dataclass(frozen=True)
class NlgScores:
    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    meteor: float
    rouge_l: float
    cider: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def score_corpus(
    candidates: Sequence[ReportLike],
    references: Sequence[ReportLike],
    rouge_beta: float = 1.2,
    bleu_epsilon: float | None = None,
) -> NlgScores:
    cands, refs = as_corpus(candidates, references)
    b = [bleu(cands, refs, n, bleu_epsilon) for n in range(1, 5)]
    return NlgScores(
        *b,
        meteor=meteor(cands, refs),
        rouge_l=rouge_l(cands, refs, rouge_beta),
        cider=cider(cands, refs),
    )


__all__ = [
    "CorpusError",
    "NlgScores",
    "TOKENIZER_VERSION",
    "TokenizedReport",
    "bleu",
    "cider",
    "cider_scores",
    "lcs",
    "meteor",
    "meteor_pair",
    "rouge_l",
    "rouge_l_pair",
    "score_corpus",
    "tokenize",
    "tokenize_text",
]
