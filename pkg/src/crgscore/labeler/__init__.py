"""Report-to-label extraction: rule-based and LLM-backed."""

from crgscore.labeler.llm import (
    ExtractionFailure,
    ExtractorConfig,
    HttpTransport,
    LlmExtractor,
    ResponseCache,
    ResponseParseError,
    SchemaViolationError,
    TransportError,
    llm_label,
    parse_structured_response,
)
from crgscore.labeler.rules import (
    DEFAULT_NEGATION_CUES,
    DEFAULT_UNCERTAINTY_CUES,
    LabelRule,
    RuleSet,
    rule_label,
    split_sentences,
)
from crgscore.schema import LabelMatrix


def label_corpus(reports, ruleset: RuleSet, labels, schema_level: int = 1):
    """Rule-label every report in ``{sample_id: text}``; rows sorted by id."""
    rows = tuple(rule_label(reports[sid], ruleset, labels, sid) for sid in sorted(reports))
    return LabelMatrix(schema_level, tuple(labels), rows)


__all__ = [
    "DEFAULT_NEGATION_CUES",
    "DEFAULT_UNCERTAINTY_CUES",
    "ExtractionFailure",
    "ExtractorConfig",
    "HttpTransport",
    "LabelRule",
    "LlmExtractor",
    "ResponseCache",
    "ResponseParseError",
    "RuleSet",
    "SchemaViolationError",
    "TransportError",
    "label_corpus",
    "llm_label",
    "parse_structured_response",
    "rule_label",
    "split_sentences",
]
