"""Distribution-aware clinical report scoring (CRG).

Weights come from the reference label distribution: with ``T`` scored cells of
which ``A`` are reference-positive, a true positive earns ``(T - A) / (2A)``, a
false negative costs the same, and a false positive costs 1. Under these weights
an empty report and an exhaustive report get the same raw score, and the
normalised score ``S_max / (2 S_max - s)`` maps both of them to exactly 1/3.

All scores are computed from an exact rational form first so the fixed points
(1/3, 0.2, 1.0) come out bit-exact in double precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from crgscore.schema import (
    AlignedCorpus,
    ConfusionCounts,
    LabelConfusion,
    LabelMatrix,
    LabelSchema,
    align_corpora,
    confusion_from_labels,
)


class DegenerateDistributionError(ValueError):
    """The reference set has no positive or no negative cells, so CRG is undefined."""

    def __init__(self, message: str, level: int | None = None):
        self.level = level
        if level is not None:
            message = f"level {level}: {message}"
        super().__init__(message)


class CountsMismatchError(ValueError):
    """Confusion counts disagree with the T and A the weights were derived from."""


@dataclass(frozen=True)
class CrgWeights:
    w_tp: float
    w_fn: float
    w_fp: float
    t_total: int
    a_positive: int
    s_max: float

    @property
    def ratio(self) -> Fraction:
        """Exact ``w_tp / w_fp`` as the integer ratio ``(T - A) / (2A)``."""
        return Fraction(self.t_total - self.a_positive, 2 * self.a_positive)

    def as_dict(self) -> dict:
        return {
            "w_tp": self.w_tp,
            "w_fn": self.w_fn,
            "w_fp": self.w_fp,
            "t_total": self.t_total,
            "a_positive": self.a_positive,
            "s_max": self.s_max,
        }


@dataclass(frozen=True)
class CrgResult:
    score: float
    raw_score: float
    weights: CrgWeights
    counts: ConfusionCounts
    exact: Fraction | None = None

    def as_dict(self) -> dict:
        return {
            "score": self.score,
            "raw_score": self.raw_score,
            "weights": self.weights.as_dict(),
            "counts": self.counts.as_dict(),
        }


@dataclass(frozen=True)
class HierarchicalCrgResult:
    per_level: tuple[CrgResult, ...]
    final: float

    def as_dict(self) -> dict:
        return {
            "final": self.final,
            "per_level": [r.as_dict() for r in self.per_level],
        }


def derive_weights(t_total: int, a_positive: int) -> CrgWeights:
    """Weights balancing the all-negative and all-positive predictors.

    >>> derive_weights(10, 1).w_tp
    4.5
    """
    if int(t_total) != t_total or int(a_positive) != a_positive:
        raise ValueError("T and A must be integers")
    t, a = int(t_total), int(a_positive)
    if t <= 0:
        raise ValueError(f"invalid input: T must be positive, got {t}")
    if a < 0 or a > t:
        raise ValueError(f"invalid input: need 0 <= A <= T, got A={a}, T={t}")
    if a == 0:
        raise DegenerateDistributionError("degenerate: no positive labels in reference set")
    if a == t:
        raise DegenerateDistributionError("degenerate: no negative labels in reference set")
    w = (t - a) / (2 * a)
    return CrgWeights(w_tp=w, w_fn=w, w_fp=1.0, t_total=t, a_positive=a, s_max=(t - a) / 2)


def _check_consistent(counts: ConfusionCounts, weights: CrgWeights) -> None:
    if counts.total != weights.t_total or counts.positives != weights.a_positive:
        raise CountsMismatchError(
            f"counts (T={counts.total}, A={counts.positives}) do not match weights "
            f"(T={weights.t_total}, A={weights.a_positive})"
        )


def _scaled_raw(counts: ConfusionCounts, weights: CrgWeights) -> int:
    # s * 2A as an integer
    num, den = weights.t_total - weights.a_positive, 2 * weights.a_positive
    return (counts.tp - counts.fn) * num - counts.fp * den


def raw_score(counts: ConfusionCounts, weights: CrgWeights, check: bool = True) -> float:
    """``TP*w_tp - FN*w_fn - FP*w_fp``.

    With ``check`` the counts must have the same T and A as the weights; pass
    ``check=False`` to apply frozen weights to a different count set.
    """
    if check:
        _check_consistent(counts, weights)
    return float(Fraction(_scaled_raw(counts, weights), 2 * weights.a_positive))


def _normalise(counts: ConfusionCounts, weights: CrgWeights) -> Fraction:
    # s_max for this count set: A_counts * w_tp, scaled by 2A like the raw score
    s_max2 = counts.positives * (weights.t_total - weights.a_positive)
    s2 = _scaled_raw(counts, weights)
    return Fraction(s_max2, 2 * s_max2 - s2)


def crg_from_counts(counts: ConfusionCounts, weights: CrgWeights | None = None) -> CrgResult:
    """CRG score of aggregated confusion counts.

    Weights are derived from the counts' own T and A unless frozen ``weights``
    are supplied, in which case the maximum score uses this count set's
    positives under the frozen weights.
    """
    if weights is None:
        weights = derive_weights(counts.total, counts.positives)
    elif counts.positives == 0:
        raise DegenerateDistributionError("degenerate: no positive labels in reference set")
    exact = _normalise(counts, weights)
    return CrgResult(
        score=float(exact),
        raw_score=raw_score(counts, weights, check=False),
        weights=weights,
        counts=counts,
        exact=exact,
    )


def crg_from_aligned(
    aligned: AlignedCorpus,
    weights: CrgWeights | None = None,
    mask: np.ndarray | None = None,
) -> tuple[CrgResult, LabelConfusion]:
    confusion = confusion_from_labels(aligned, mask)
    return crg_from_counts(confusion.total, weights), confusion


def crg_from_labels(
    predictions: LabelMatrix,
    references: LabelMatrix,
    strict: bool = True,
    weights: CrgWeights | None = None,
) -> CrgResult:
    aligned = align_corpora(predictions, references, strict=strict)
    return crg_from_aligned(aligned, weights)[0]


def parent_mask(
    child: AlignedCorpus, parent: AlignedCorpus, schema: LabelSchema
) -> np.ndarray:
    """Cells of ``child`` whose parent label is positive in the parent-level reference.

    Labels without a parent are always kept. Samples missing from the parent
    level are excluded from parented labels.
    """
    defs = {d.name: d for d in schema.level(child.schema_level)}
    row_of = {sid: i for i, sid in enumerate(parent.sample_ids)}
    col_of = {name: j for j, name in enumerate(parent.labels)}
    mask = np.ones(child.predictions.shape, dtype=np.uint8)
    for j, name in enumerate(child.labels):
        p = defs[name].parent if name in defs else None
        if p is None:
            continue
        pj = col_of[p]
        for i, sid in enumerate(child.sample_ids):
            pi = row_of.get(sid)
            mask[i, j] = 0 if pi is None else parent.references[pi, pj]
    return mask


def score_levels(
    level_inputs: Sequence[tuple[LabelMatrix, LabelMatrix]],
    schema: LabelSchema | None = None,
    conditional: bool = False,
    strict: bool = True,
) -> list[tuple[AlignedCorpus, CrgResult, LabelConfusion]]:
    """Align and score each level with its own weights; shared by the hierarchical API."""
    if not level_inputs:
        raise ValueError("at least one level is required")
    if conditional and schema is None:
        raise ValueError("conditional level scoring needs the schema's parent links")
    out = []
    previous: AlignedCorpus | None = None
    for k, (pred, ref) in enumerate(level_inputs, start=1):
        aligned = align_corpora(pred, ref, strict=strict)
        mask = None
        if conditional and previous is not None:
            mask = parent_mask(aligned, previous, schema)
        try:
            result, confusion = crg_from_aligned(aligned, mask=mask)
        except DegenerateDistributionError as exc:
            raise DegenerateDistributionError(str(exc), level=k) from exc
        out.append((aligned, result, confusion))
        previous = aligned
    return out


def mean_of_levels(results: Sequence[CrgResult]) -> HierarchicalCrgResult:
    final = sum((r.exact for r in results), Fraction(0)) / len(results)
    return HierarchicalCrgResult(tuple(results), float(final))


def crg_hierarchical(
    level_inputs: Sequence[tuple[LabelMatrix, LabelMatrix]],
    schema: LabelSchema | None = None,
    conditional: bool = False,
    strict: bool = True,
) -> HierarchicalCrgResult:
    """CRG per schema level, each with its own weights, and their unweighted mean.

    ``level_inputs[k]`` holds the (predictions, references) pair for level
    ``k + 1``. With ``conditional`` (requires ``schema``) a child label's cells
    are scored only for samples whose reference has the parent label positive;
    otherwise every child cell counts, reference-negative where not mentioned.
    A degenerate level raises with the level number attached.
    """
    scored = score_levels(level_inputs, schema, conditional, strict)
    return mean_of_levels([result for _, result, _ in scored])
