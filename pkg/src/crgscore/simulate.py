"""Synthetic corpora showing how the metrics react to class imbalance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from crgscore.classical import micro_metrics
from crgscore.crg import crg_from_counts
from crgscore.schema import ConfusionCounts
from crgscore import kernels

RNG_ALGORITHM = "numpy.random.Generator(PCG64)"

Predictor = Literal["always_negative", "always_positive", "noisy"]


@dataclass(frozen=True)
class SimulationSpec:
    n_samples: int
    n_labels: int
    prevalence: float
    predictor: Predictor = "always_negative"
    sensitivity: float = 1.0
    specificity: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 1 or self.n_labels < 1:
            raise ValueError("n_samples and n_labels must be positive")
        if not 0.0 < self.prevalence < 1.0:
            raise ValueError(f"prevalence must be strictly inside (0, 1), got {self.prevalence}")
        if self.predictor not in ("always_negative", "always_positive", "noisy"):
            raise ValueError(f"unknown predictor {self.predictor!r}")
        for name in ("sensitivity", "specificity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


def simulate_arrays(spec: SimulationSpec) -> tuple[np.ndarray, np.ndarray]:
    """Reference and prediction arrays (uint8) for one configuration."""
    rng = np.random.default_rng(spec.seed)
    shape = (spec.n_samples, spec.n_labels)
    ref = (rng.random(shape) < spec.prevalence).astype(np.uint8)
    if spec.predictor == "always_negative":
        pred = np.zeros(shape, dtype=np.uint8)
    elif spec.predictor == "always_positive":
        pred = np.ones(shape, dtype=np.uint8)
    else:
        u = rng.random(shape)
        pred = np.where(ref == 1, u < spec.sensitivity, u >= spec.specificity).astype(np.uint8)
    return ref, pred


def simulate(spec: SimulationSpec) -> dict:
    ref, pred = simulate_arrays(spec)
    c, f, p, t = (int(x) for x in kernels.confusion_counts(pred, ref).sum(axis=0))
    counts = ConfusionCounts(c, f, p, t)
    micro = micro_metrics(counts)
    return {
        "predictor": spec.predictor,
        "prevalence": spec.prevalence,
        "n_samples": spec.n_samples,
        "n_labels": spec.n_labels,
        "seed": spec.seed,
        "accuracy": micro.accuracy,
        "f1": micro.f1,
        "recall": micro.recall,
        "precision": micro.precision,
        "crg": crg_from_counts(counts).score,
        **counts.as_dict(),
    }
