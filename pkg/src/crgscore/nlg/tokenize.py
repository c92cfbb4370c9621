"""Report tokenizer shared by every overlap metric."""

from __future__ import annotations

import re
from dataclasses import dataclass

TOKENIZER_VERSION = "1"

# decimal numbers stay whole; anything else non-alphanumeric separates tokens
_TOKEN_RE = re.compile(r"\d+(?:\.\d+)+|[^\W_]+")


@dataclass(frozen=True)
class TokenizedReport:
    sample_id: str
    tokens: tuple[str, ...]


def tokenize_text(text: str) -> tuple[str, ...]:
    return tuple(_TOKEN_RE.findall(text.lower()))


def tokenize(text: str, sample_id: str = "") -> TokenizedReport:
    """Lowercase word tokens with punctuation removed.

    >>> tokenize("5.5 mm nodule, left lung").tokens
    ('5.5', 'mm', 'nodule', 'left', 'lung')
    """
    return TokenizedReport(sample_id, tokenize_text(text))
