"""Distribution-aware clinical accuracy scoring for generated radiology reports."""

__version__ = "0.1.0"

from crgscore.classical import ClassicalMetrics, macro_metrics, micro_metrics
from crgscore.crg import (
    CountsMismatchError,
    CrgResult,
    CrgWeights,
    DegenerateDistributionError,
    HierarchicalCrgResult,
    crg_from_counts,
    crg_from_labels,
    crg_hierarchical,
    derive_weights,
    raw_score,
)
from crgscore.schema import (
    AlignedCorpus,
    AlignmentError,
    ConfusionCounts,
    LabelAssignment,
    LabelConfusion,
    LabelDef,
    LabelError,
    LabelMatrix,
    LabelSchema,
    SchemaError,
    align_corpora,
    confusion_from_labels,
    validate_schema,
)

__all__ = [
    "AlignedCorpus",
    "AlignmentError",
    "ClassicalMetrics",
    "ConfusionCounts",
    "CountsMismatchError",
    "CrgResult",
    "CrgWeights",
    "DegenerateDistributionError",
    "HierarchicalCrgResult",
    "LabelAssignment",
    "LabelConfusion",
    "LabelDef",
    "LabelError",
    "LabelMatrix",
    "LabelSchema",
    "SchemaError",
    "align_corpora",
    "confusion_from_labels",
    "crg_from_counts",
    "crg_from_labels",
    "crg_hierarchical",
    "derive_weights",
    "macro_metrics",
    "micro_metrics",
    "raw_score",
    "validate_schema",
]
