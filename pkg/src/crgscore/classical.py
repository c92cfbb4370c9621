"""Precision, recall, F1 and accuracy over confusion counts, micro and macro averaged.

Zero denominators follow the usual convention: the metric is reported as 0.0
and the label (or ``"micro"``) is recorded in ``undefined``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Mapping

from crgscore.schema import ConfusionCounts

Averaging = Literal["micro", "macro"]


@dataclass(frozen=True)
class ClassicalMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    averaging: Averaging
    undefined: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "averaging": self.averaging,
            "undefined": list(self.undefined),
        }


def _ratio(num: int, den: int) -> tuple[float, bool]:
    if den == 0:
        return 0.0, False
    return num / den, True


def _per_label(c: ConfusionCounts) -> tuple[float, float, float, float, bool]:
    precision, p_ok = _ratio(c.tp, c.tp + c.fp)
    recall, r_ok = _ratio(c.tp, c.tp + c.fn)
    f1, f_ok = _ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn)
    accuracy, _ = _ratio(c.tp + c.tn, c.total)
    return precision, recall, f1, accuracy, p_ok and r_ok and f_ok


def micro_metrics(counts: ConfusionCounts) -> ClassicalMetrics:
    if counts.total == 0:
        raise ValueError("no scored cells")
    precision, recall, f1, accuracy, ok = _per_label(counts)
    return ClassicalMetrics(
        precision, recall, f1, accuracy, "micro", () if ok else ("micro",)
    )


def macro_metrics(
    per_label: Mapping[str, ConfusionCounts], skip_undefined: bool = False
) -> ClassicalMetrics:
    """Unweighted mean of per-label metrics.

    Labels with an undefined precision or recall contribute zeros unless
    ``skip_undefined`` is set, in which case they are left out of all four means.
    """
    if not per_label:
        raise ValueError("macro averaging needs at least one label")
    rows = []
    undefined = []
    for name, counts in per_label.items():
        p, r, f, a, ok = _per_label(counts)
        if not ok:
            undefined.append(name)
            if skip_undefined:
                continue
        rows.append((p, r, f, a))
    if not rows:
        return ClassicalMetrics(0.0, 0.0, 0.0, 0.0, "macro", tuple(undefined))
    n = len(rows)
    means = [sum(col) / n for col in zip(*rows)]
    return ClassicalMetrics(*means, averaging="macro", undefined=tuple(undefined))
