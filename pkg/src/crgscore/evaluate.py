"""End-to-end scoring: labels (or raw text) in, full score bundle out."""

from __future__ import annotations

import json
import warnings as warnings_module
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from crgscore import __version__, kernels
from crgscore.classical import ClassicalMetrics, macro_metrics, micro_metrics
from crgscore.crg import HierarchicalCrgResult, crg_from_counts, mean_of_levels, score_levels
from crgscore.labeler import RuleSet, label_corpus
from crgscore.nlg import NlgScores, TOKENIZER_VERSION, score_corpus
from crgscore.schema import AlignmentError, ConfusionCounts, LabelMatrix, LabelSchema


@dataclass(frozen=True)
class LevelMetrics:
    level: int
    micro: ClassicalMetrics
    macro: ClassicalMetrics | None

    def as_dict(self) -> dict:
        return {
            "level": self.level,
            "micro": self.micro.as_dict(),
            "macro": self.macro.as_dict() if self.macro else None,
        }


@dataclass
class EvaluationReport:
    metadata: dict
    crg: HierarchicalCrgResult
    classical: list[LevelMetrics]
    nlg: NlgScores | None = None
    warnings: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "crg": self.crg.as_dict(),
            "classical": [c.as_dict() for c in self.classical],
            "nlg": self.nlg.as_dict() if self.nlg else None,
            "warnings": list(self.warnings),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        lines = [f"CRG final: {self.crg.final:.4f}"]
        for k, r in enumerate(self.crg.per_level, start=1):
            c = r.counts
            lines.append(
                f"  CRG-{k}: {r.score:.4f}  (TP={c.tp} FN={c.fn} FP={c.fp} TN={c.tn}, "
                f"w_tp=w_fn={r.weights.w_tp:.6f}, s={r.raw_score:.3f}, S_max={r.weights.s_max:.3f})"
            )
        header = f"{'level':<6}{'avg':<7}{'precision':>10}{'recall':>10}{'f1':>10}{'accuracy':>10}"
        lines += ["", header]
        for lm in self.classical:
            for m in (lm.micro, lm.macro):
                if m is None:
                    continue
                lines.append(
                    f"{lm.level:<6}{m.averaging:<7}{m.precision:>10.4f}{m.recall:>10.4f}"
                    f"{m.f1:>10.4f}{m.accuracy:>10.4f}"
                )
        if self.nlg is not None:
            lines.append("")
            for name, value in self.nlg.as_dict().items():
                lines.append(f"{name:<8}{value:>10.4f}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        return "\n".join(lines) + "\n"


def align_reports(
    candidates: Mapping[str, str], references: Mapping[str, str], strict: bool = True
) -> tuple[list[str], list[str], list[str], list[str]]:
    """Join two text corpora on sample_id; returns ids, candidate texts, reference texts, dropped ids."""
    missing = sorted(set(candidates) ^ set(references))
    if missing and strict:
        raise AlignmentError(
            f"{len(missing)} sample(s) present in only one corpus: {', '.join(missing[:10])}",
            missing,
        )
    ids = sorted(set(candidates) & set(references))
    return ids, [candidates[i] for i in ids], [references[i] for i in ids], missing


def evaluate_labels(
    level_inputs: Sequence[tuple[LabelMatrix, LabelMatrix]],
    schema: LabelSchema | None = None,
    strict: bool = True,
    conditional: bool = False,
) -> tuple[HierarchicalCrgResult, list[LevelMetrics], list[str]]:
    """CRG and classical metrics for each level; CRG final is the unweighted mean."""
    scored = score_levels(level_inputs, schema, conditional, strict)
    warnings = []
    classical = []
    for aligned, _, conf in scored:
        if aligned.dropped:
            warnings.append(
                f"level {aligned.schema_level}: dropped {len(aligned.dropped)} unaligned "
                "sample(s): " + ", ".join(aligned.dropped[:10])
            )
        classical.append(
            LevelMetrics(aligned.schema_level, micro_metrics(conf.total), macro_metrics(conf.per_label))
        )
    return mean_of_levels([r for _, r, _ in scored]), classical, warnings


def evaluate_counts(counts: ConfusionCounts, metadata: dict | None = None) -> EvaluationReport:
    result = crg_from_counts(counts)
    crg = HierarchicalCrgResult((result,), result.score)
    meta = {"tool_version": __version__, "input": "counts", **(metadata or {})}
    return EvaluationReport(meta, crg, [LevelMetrics(1, micro_metrics(counts), None)])


def evaluate(
    schema: LabelSchema,
    *,
    candidates: Mapping[str, str] | None = None,
    references: Mapping[str, str] | None = None,
    label_inputs: Sequence[tuple[LabelMatrix, LabelMatrix]] | None = None,
    rulesets: Sequence[RuleSet] = (),
    levels: Sequence[int] | None = None,
    strict: bool = True,
    conditional: bool = False,
    nlg: bool = True,
    metadata: dict | None = None,
) -> EvaluationReport:
    """Score one model run.

    Label matrices are used when given; otherwise the texts are labelled with
    ``rulesets`` (one per scored level). NLG metrics need both text corpora.
    """
    warnings: list[str] = []
    if label_inputs is None:
        if candidates is None or references is None:
            raise ValueError("need label matrices or both text corpora")
        by_level = {rs.level: rs for rs in rulesets}
        wanted = list(levels) if levels else list(range(1, schema.depth + 1))
        label_inputs = []
        for k in wanted:
            rs = by_level.get(k)
            if rs is None:
                if levels:
                    raise ValueError(f"no labelling rules for requested level {k}")
                warnings.append(f"level {k}: no labelling rules, level not scored")
                continue
            names = schema.label_names(k)
            label_inputs.append(
                (label_corpus(candidates, rs, names, k), label_corpus(references, rs, names, k))
            )
        if not label_inputs:
            raise ValueError("no schema level could be labelled")
    elif levels:
        label_inputs = [pair for pair in label_inputs if pair[1].schema_level in set(levels)]
        if not label_inputs:
            raise ValueError(f"no label inputs for level(s) {list(levels)}")

    crg, classical, more = evaluate_labels(label_inputs, schema, strict, conditional)
    warnings += more

    nlg_scores = None
    n_pairs = len(label_inputs[0][1])
    if nlg and candidates is not None and references is not None:
        ids, cand_texts, ref_texts, dropped = align_reports(candidates, references, strict)
        if dropped:
            warnings.append(f"nlg: dropped {len(dropped)} unaligned sample(s)")
        with warnings_module.catch_warnings(record=True) as caught:
            warnings_module.simplefilter("always")
            nlg_scores = score_corpus(cand_texts, ref_texts)
        warnings += [f"nlg: {w.message}" for w in caught]

    meta = {
        "tool_version": __version__,
        "kernel_backend": kernels.BACKEND,
        "tokenizer_version": TOKENIZER_VERSION,
        "schema_version": schema.version,
        "levels": [ref.schema_level for _, ref in label_inputs],
        "corpus_sizes": {
            "candidates": len(candidates) if candidates is not None else len(label_inputs[0][0]),
            "references": n_pairs if candidates is None else len(references or {}),
        },
        "strict": strict,
        "conditional": conditional,
        "rules_versions": [rs.version for rs in rulesets],
        **(metadata or {}),
    }
    return EvaluationReport(meta, crg, classical, nlg_scores, warnings)
