"""CRG as a reinforcement-learning reward.

Weights are frozen once from a designated reference corpus and reused for every
sample, so the reward does not drift with minibatch composition. A single
sample is scored with the corpus formula at sample scale: its raw score under
the frozen weights, normalised by the sample's own maximum ``a * w_tp``. The
all-negative prediction for a sample with findings therefore earns 1/3 and a
perfect one earns 1.

This per-sample form is an extension of the corpus-level metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Mapping, Sequence

from crgscore import kernels
from crgscore.crg import CrgWeights, crg_from_counts, derive_weights
from crgscore.schema import (
    ConfusionCounts,
    LabelAssignment,
    LabelError,
    LabelMatrix,
    align_corpora,
    confusion_from_labels,
)

REWARD_FLOOR = 0.2

FluencyMetric = Literal["bleu4", "rouge_l", "none"]


@dataclass(frozen=True)
class RewardConfig:
    weights: CrgWeights
    blend_lambda: float = 1.0
    fluency_metric: FluencyMetric = "none"
    labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.blend_lambda <= 1.0:
            raise ValueError(f"blend_lambda must be in [0, 1], got {self.blend_lambda}")
        if self.fluency_metric not in ("bleu4", "rouge_l", "none"):
            raise ValueError(f"unknown fluency metric {self.fluency_metric!r}")
        if self.labels is not None:
            object.__setattr__(self, "labels", tuple(self.labels))


def freeze_weights(references: LabelMatrix) -> CrgWeights:
    """Weights from a reference corpus's T and A."""
    arr = references.to_array()
    return derive_weights(int(arr.size), int(arr.sum()))


def _values(x: LabelAssignment | Mapping[str, int]) -> Mapping[str, int]:
    return x.values if isinstance(x, LabelAssignment) else x


def sample_counts(
    predicted: LabelAssignment | Mapping[str, int],
    reference: LabelAssignment | Mapping[str, int],
    labels: Sequence[str] | None = None,
) -> ConfusionCounts:
    p, r = _values(predicted), _values(reference)
    if set(p) != set(r):
        raise LabelError(f"label mismatch: {sorted(set(p) ^ set(r))}")
    if labels is not None and set(labels) != set(r):
        raise LabelError(
            f"labels differ from the frozen weights' schema: {sorted(set(labels) ^ set(r))}"
        )
    tp = fn = fp = tn = 0
    for name, rv in r.items():
        pv = p[name]
        if rv and pv:
            tp += 1
        elif rv:
            fn += 1
        elif pv:
            fp += 1
        else:
            tn += 1
    return ConfusionCounts(tp, fn, fp, tn)


def reward_from_counts(counts: ConfusionCounts, weights: CrgWeights) -> float:
    """Per-sample reward in ``[0.2, 1]`` for one sample's counts under frozen weights."""
    ratio = weights.ratio  # w_tp / w_fp, exact
    if counts.positives == 0:
        if counts.fp == 0:
            return 1.0
        # one virtual positive as the normaliser
        return max(REWARD_FLOOR, float(1 - Fraction(counts.fp) / ratio))
    s_max = counts.positives * ratio
    s = (counts.tp - counts.fn) * ratio - counts.fp
    return max(REWARD_FLOOR, float(s_max / (2 * s_max - s)))


def sample_reward(
    predicted: LabelAssignment | Mapping[str, int],
    reference: LabelAssignment | Mapping[str, int],
    config: RewardConfig,
) -> float:
    return reward_from_counts(sample_counts(predicted, reference, config.labels), config.weights)


def blended_reward(sample_reward: float, fluency_score: float, lam: float) -> float:
    """``lam * sample_reward + (1 - lam) * fluency_score``."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must be in [0, 1], got {lam}")
    return lam * sample_reward + (1.0 - lam) * fluency_score


def per_sample_rewards(
    predictions: LabelMatrix,
    references: LabelMatrix,
    config: RewardConfig,
    fluency: Mapping[str, float] | None = None,
    strict: bool = True,
) -> dict[str, float]:
    """Reward per sample_id, blended with ``fluency[sample_id]`` when given."""
    if config.labels is not None and set(config.labels) != set(references.labels):
        raise LabelError("reference labels differ from the frozen weights' schema")
    aligned = align_corpora(predictions, references, strict=strict)
    out: dict[str, float] = {}
    for i, sid in enumerate(aligned.sample_ids):
        row = kernels.confusion_counts(
            aligned.predictions[i : i + 1], aligned.references[i : i + 1]
        ).sum(axis=0)
        counts = ConfusionCounts(*(int(x) for x in row))
        value = reward_from_counts(counts, config.weights)
        if fluency is not None and config.fluency_metric != "none":
            value = blended_reward(value, fluency[sid], config.blend_lambda)
        out[sid] = value
    return out


def batch_reward(
    predictions: LabelMatrix, references: LabelMatrix, config: RewardConfig, strict: bool = True
) -> float:
    """Corpus CRG of a minibatch under the frozen weights, floored at 0.2."""
    aligned = align_corpora(predictions, references, strict=strict)
    counts = confusion_from_labels(aligned).total
    if counts.positives == 0:
        return reward_from_counts(counts, config.weights)
    return max(REWARD_FLOOR, crg_from_counts(counts, config.weights).score)
