"""Keyword labeler with a forward negation window.

A label fires when one of its trigger phrases occurs in a sentence and no
negation cue ends within ``window`` tokens before it in that same sentence.
Labels whose triggers never fire are 0, i.e. unmentioned findings are normal.

Sentences are split on periods, semicolons and newlines (a period between two
digits is kept, so "5.5 mm" stays intact). This is a heuristic; abbreviations
such as "approx." end a sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from crgscore.nlg.tokenize import tokenize_text
from crgscore.schema import LabelAssignment, LabelError

DEFAULT_NEGATION_CUES = (
    "no",
    "not",
    "without",
    "absence of",
    "negative for",
    "free of",
    "no evidence of",
    "no sign of",
    "no signs of",
    "rather than",
)

DEFAULT_UNCERTAINTY_CUES = (
    "cannot exclude",
    "cannot be excluded",
    "can not be excluded",
    "not excluded",
    "cannot be ruled out",
    "may represent",
    "possible",
    "possibly",
    "suspicious for",
    "questionable",
)

_SENTENCE_RE = re.compile(r"(?<!\d)\.|\.(?!\d)|;|\n")


@dataclass(frozen=True)
class LabelRule:
    label: str
    triggers: tuple[str, ...]
    negation_cues: tuple[str, ...] = DEFAULT_NEGATION_CUES
    window: int = 6

    def __post_init__(self) -> None:
        object.__setattr__(self, "triggers", tuple(t.lower() for t in self.triggers))
        object.__setattr__(self, "negation_cues", tuple(c.lower() for c in self.negation_cues))
        if not self.triggers:
            raise ValueError(f"rule for {self.label!r} has no triggers")
        if self.window < 1:
            raise ValueError(f"rule for {self.label!r}: window must be >= 1, got {self.window}")


@dataclass(frozen=True)
class RuleSet:
    """Rules for one schema level plus the shared hedging policy.

    ``uncertain_as`` decides what a trigger near an uncertainty cue means:
    ``"positive"`` (default) keeps it, overriding any negation cue, and
    ``"negative"`` drops it.
    """

    rules: tuple[LabelRule, ...]
    uncertainty_cues: tuple[str, ...] = DEFAULT_UNCERTAINTY_CUES
    uncertain_as: Literal["positive", "negative"] = "positive"
    uncertainty_window: int = 6
    version: str = "1"
    level: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        if self.uncertain_as not in ("positive", "negative"):
            raise ValueError(f"uncertain_as must be 'positive' or 'negative', got {self.uncertain_as!r}")


def split_sentences(text: str) -> list[str]:
    return [s for s in _SENTENCE_RE.split(text) if s.strip()]


def _phrase(p: str) -> tuple[str, ...]:
    return tokenize_text(p)


def _find(tokens: Sequence[str], phrase: Sequence[str]) -> Iterable[int]:
    n = len(phrase)
    if n == 0:
        return
    for i in range(len(tokens) - n + 1):
        if tuple(tokens[i : i + n]) == tuple(phrase):
            yield i


def _ends_before(tokens: Sequence[str], cue: Sequence[str], start: int, window: int) -> bool:
    # a cue ending at e (exclusive) scopes a trigger at start if 0 <= start - e < window
    for i in _find(tokens, cue):
        gap = start - (i + len(cue))
        if 0 <= gap < window:
            return True
    return False


def _near(tokens: Sequence[str], cue: Sequence[str], start: int, end: int, window: int) -> bool:
    for i in _find(tokens, cue):
        e = i + len(cue)
        if 0 <= start - e < window or 0 <= i - end < window or (i < end and e > start):
            return True
    return False


def _fires(tokens: Sequence[str], rule: LabelRule, ruleset: RuleSet) -> bool:
    cues = [_phrase(c) for c in rule.negation_cues]
    hedges = [_phrase(c) for c in ruleset.uncertainty_cues]
    for trig in rule.triggers:
        phrase = _phrase(trig)
        for start in _find(tokens, phrase):
            end = start + len(phrase)
            hedged = any(_near(tokens, h, start, end, ruleset.uncertainty_window) for h in hedges)
            if hedged:
                if ruleset.uncertain_as == "positive":
                    return True
                continue
            if not any(_ends_before(tokens, c, start, rule.window) for c in cues):
                return True
    return False


def rule_label(
    report_text: str,
    rules: RuleSet | Sequence[LabelRule],
    labels: Sequence[str],
    sample_id: str = "",
) -> LabelAssignment:
    """Binary assignment over ``labels`` for one report.

    >>> rs = RuleSet((LabelRule("effusion", ("pleural effusion",)),))
    >>> rule_label("No pleural effusion.", rs, ["effusion"]).values
    {'effusion': 0}
    """
    ruleset = rules if isinstance(rules, RuleSet) else RuleSet(tuple(rules))
    known = set(labels)
    unknown = sorted({r.label for r in ruleset.rules} - known)
    if unknown:
        raise LabelError(f"rules reference labels not in the schema level: {unknown}")
    values = {name: 0 for name in labels}
    sentences = [tokenize_text(s) for s in split_sentences(report_text)]
    for rule in ruleset.rules:
        if values[rule.label]:
            continue
        if any(_fires(toks, rule, ruleset) for toks in sentences):
            values[rule.label] = 1
    return LabelAssignment(sample_id, values)
