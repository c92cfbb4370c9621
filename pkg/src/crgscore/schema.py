"""Label schemas, per-sample label assignments and confusion-count aggregation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from crgscore import kernels


class SchemaError(ValueError):
    """Raised when a schema violates its structural invariants.

    ``problems`` holds one ``(level, name, message)`` tuple per violation.
    """

    def __init__(self, problems: Sequence[tuple[int, str, str]]):
        self.problems = list(problems)
        lines = [f"level {lvl}, label {name!r}: {msg}" for lvl, name, msg in self.problems]
        super().__init__("invalid schema:\n  " + "\n  ".join(lines))


class LabelError(ValueError):
    """A label assignment or matrix does not conform to its schema level."""


class AlignmentError(ValueError):
    """Prediction and reference corpora cannot be paired."""

    def __init__(self, message: str, missing: Sequence[str] = ()):
        self.missing = list(missing)
        super().__init__(message)


@dataclass(frozen=True)
class LabelDef:
    name: str
    level: int
    parent: str | None = None


@dataclass(frozen=True)
class LabelSchema:
    """Hierarchical label set. ``levels[0]`` is level 1 (general classes)."""

    levels: tuple[tuple[LabelDef, ...], ...]
    version: str = "1"

    def level(self, k: int) -> tuple[LabelDef, ...]:
        if not 1 <= k <= len(self.levels):
            raise LabelError(f"schema has no level {k} (levels 1..{len(self.levels)})")
        return self.levels[k - 1]

    def label_names(self, k: int) -> tuple[str, ...]:
        return tuple(d.name for d in self.level(k))

    @property
    def depth(self) -> int:
        return len(self.levels)

    @classmethod
    def from_names(cls, *levels: Sequence[str], version: str = "1") -> "LabelSchema":
        """Build a schema without parent links, one positional sequence per level."""
        built = tuple(
            tuple(LabelDef(name, k) for name in names) for k, names in enumerate(levels, start=1)
        )
        return cls(built, version)


def validate_schema(schema: LabelSchema) -> LabelSchema:
    """Return ``schema`` unchanged or raise :class:`SchemaError` listing every violation."""
    problems: list[tuple[int, str, str]] = []
    if not schema.levels:
        problems.append((0, "", "schema has no levels"))
    previous: set[str] = set()
    for k, defs in enumerate(schema.levels, start=1):
        if not defs:
            problems.append((k, "", "empty level"))
        seen: set[str] = set()
        for d in defs:
            if not d.name:
                problems.append((k, d.name, "empty label name"))
            if d.level != k:
                problems.append((k, d.name, f"declared level {d.level} but listed at level {k}"))
            if d.name in seen:
                problems.append((k, d.name, "duplicate label"))
            seen.add(d.name)
            if d.parent is not None:
                if k == 1:
                    problems.append((k, d.name, "level-1 labels cannot have a parent"))
                elif d.parent not in previous:
                    problems.append((k, d.name, f"dangling parent {d.parent!r}"))
        previous = seen
    if problems:
        raise SchemaError(problems)
    return schema


@dataclass(frozen=True)
class LabelAssignment:
    sample_id: str
    values: Mapping[str, int]

    def check(self, labels: Iterable[str]) -> None:
        expected = set(labels)
        got = set(self.values)
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        if missing or extra:
            raise LabelError(
                f"sample {self.sample_id!r}: missing labels {missing}, unknown labels {extra}"
            )
        bad = {k: v for k, v in self.values.items() if v not in (0, 1) or isinstance(v, float)}
        if bad:
            raise LabelError(f"sample {self.sample_id!r}: non-binary values {bad}")


@dataclass(frozen=True)
class LabelMatrix:
    """Binary labels for a corpus at one schema level.

    ``labels`` fixes the column order; every row must carry exactly these keys.
    """

    schema_level: int
    labels: tuple[str, ...]
    rows: tuple[LabelAssignment, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "rows", tuple(self.rows))
        if len(set(self.labels)) != len(self.labels):
            raise LabelError("duplicate label names in matrix header")
        seen: set[str] = set()
        for row in self.rows:
            if row.sample_id in seen:
                raise LabelError(f"duplicate sample_id {row.sample_id!r}")
            seen.add(row.sample_id)
            row.check(self.labels)

    @classmethod
    def from_array(
        cls,
        array: np.ndarray,
        labels: Sequence[str],
        sample_ids: Sequence[str] | None = None,
        schema_level: int = 1,
    ) -> "LabelMatrix":
        array = np.asarray(array)
        if sample_ids is None:
            sample_ids = [f"s{i}" for i in range(array.shape[0])]
        rows = tuple(
            LabelAssignment(sid, {name: int(v) for name, v in zip(labels, array[i])})
            for i, sid in enumerate(sample_ids)
        )
        return cls(schema_level, tuple(labels), rows)

    @property
    def sample_ids(self) -> tuple[str, ...]:
        return tuple(r.sample_id for r in self.rows)

    def to_array(self, labels: Sequence[str] | None = None) -> np.ndarray:
        cols = self.labels if labels is None else labels
        out = np.zeros((len(self.rows), len(cols)), dtype=np.uint8)
        for i, row in enumerate(self.rows):
            for j, name in enumerate(cols):
                out[i, j] = row.values[name]
        return out

    def __len__(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class AlignedCorpus:
    """Prediction/reference arrays joined on sample_id, rows sorted by id."""

    schema_level: int
    labels: tuple[str, ...]
    sample_ids: tuple[str, ...]
    predictions: np.ndarray
    references: np.ndarray
    dropped: tuple[str, ...] = ()


def align_corpora(
    predictions: LabelMatrix, references: LabelMatrix, strict: bool = True
) -> AlignedCorpus:
    """Pair rows of two matrices by sample_id.

    In strict mode any id present on only one side raises :class:`AlignmentError`;
    in lenient mode those ids are dropped and listed in ``dropped``.
    """
    if predictions.schema_level != references.schema_level:
        raise AlignmentError(
            f"schema level mismatch: predictions at {predictions.schema_level}, "
            f"references at {references.schema_level}"
        )
    if set(predictions.labels) != set(references.labels):
        diff = sorted(set(predictions.labels) ^ set(references.labels))
        raise AlignmentError(f"label-set mismatch between corpora: {diff}")

    pred_by_id = {r.sample_id: r for r in predictions.rows}
    ref_by_id = {r.sample_id: r for r in references.rows}
    missing = sorted(set(pred_by_id) ^ set(ref_by_id))
    if missing and strict:
        raise AlignmentError(
            f"{len(missing)} sample(s) present in only one corpus: {', '.join(missing[:10])}",
            missing,
        )
    ids = tuple(sorted(set(pred_by_id) & set(ref_by_id)))
    labels = references.labels
    pred = np.zeros((len(ids), len(labels)), dtype=np.uint8)
    ref = np.zeros_like(pred)
    for i, sid in enumerate(ids):
        pv, rv = pred_by_id[sid].values, ref_by_id[sid].values
        for j, name in enumerate(labels):
            pred[i, j] = pv[name]
            ref[i, j] = rv[name]
    return AlignedCorpus(references.schema_level, labels, ids, pred, ref, tuple(missing))


@dataclass(frozen=True, order=True)
class ConfusionCounts:
    tp: int = 0
    fn: int = 0
    fp: int = 0
    tn: int = 0

    def __post_init__(self) -> None:
        for name in ("tp", "fn", "fp", "tn"):
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        """T: number of scored (sample, label) cells."""
        return self.tp + self.fn + self.fp + self.tn

    @property
    def positives(self) -> int:
        """A: number of reference-positive cells."""
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fn + other.fn, self.fp + other.fp, self.tn + other.tn
        )

    def scaled(self, k: int) -> "ConfusionCounts":
        return ConfusionCounts(self.tp * k, self.fn * k, self.fp * k, self.tn * k)

    def as_dict(self) -> dict[str, int]:
        return {"tp": self.tp, "fn": self.fn, "fp": self.fp, "tn": self.tn}


@dataclass(frozen=True)
class LabelConfusion:
    total: ConfusionCounts
    per_label: dict[str, ConfusionCounts] = field(default_factory=dict)


def confusion_from_labels(
    aligned: AlignedCorpus, mask: np.ndarray | None = None
) -> LabelConfusion:
    """Micro-aggregate TP/FN/FP/TN over every (sample, label) cell.

    ``mask`` (same shape, 0/1) excludes cells from scoring entirely; used by
    conditional level-2 evaluation.
    """
    pred, ref = aligned.predictions, aligned.references
    if pred.shape != ref.shape:
        raise LabelError(f"shape mismatch: {pred.shape} vs {ref.shape}")
    if pred.shape[1] != len(aligned.labels):
        raise LabelError("label-set mismatch between rows and header")
    if mask is not None:
        mask = np.ascontiguousarray(mask, dtype=np.uint8)
        if mask.shape != pred.shape:
            raise LabelError(f"mask shape {mask.shape} does not match {pred.shape}")
    table = kernels.confusion_counts(
        np.ascontiguousarray(pred, dtype=np.uint8),
        np.ascontiguousarray(ref, dtype=np.uint8),
        mask,
    )
    per_label = {
        name: ConfusionCounts(*(int(x) for x in table[j])) for j, name in enumerate(aligned.labels)
    }
    tp, fn, fp, tn = (int(x) for x in table.sum(axis=0)) if len(table) else (0, 0, 0, 0)
    return LabelConfusion(ConfusionCounts(tp, fn, fp, tn), per_label)
