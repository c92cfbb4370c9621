"""LLM-backed label extraction over an injectable transport.

A transport is any callable taking the request body (a dict) and returning
the model's reply as text. :class:`HttpTransport` posts a chat-style body to
an HTTP endpoint; tests pass a plain function instead.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import threading
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

from crgscore.schema import LabelAssignment, LabelMatrix

logger = logging.getLogger(__name__)

API_KEY_ENV = "CRGSCORE_API_KEY"
CACHE_DIR_ENV = "CRGSCORE_CACHE_DIR"

DEFAULT_PROMPT = (
    "You are labelling a radiology report. For each finding listed below, answer 1 if "
    "the report describes it as present (including hedged mentions) and 0 if it is "
    "absent or not mentioned.\n\nFindings:\n{labels}\n\nReport:\n{report}\n\n"
    "Reply with a single JSON object mapping every finding name to 0 or 1."
)

Transport = Callable[[dict], str]


class TransportError(RuntimeError):
    pass


class ResponseParseError(ValueError):
    """The reply holds no usable label object (retryable)."""


class SchemaViolationError(ValueError):
    """The reply parsed but does not cover every label of the schema level."""

    def __init__(self, message: str, missing: Sequence[str] = ()):
        self.missing = list(missing)
        super().__init__(message)


class ExtractionFailure(RuntimeError):
    def __init__(self, message: str, last_response: str | None, attempts: int):
        self.last_response = last_response
        self.attempts = attempts
        super().__init__(message)


@dataclass(frozen=True)
class ExtractorConfig:
    endpoint: str = ""
    model_name: str = ""
    prompt_template: str = DEFAULT_PROMPT
    max_retries: int = 2
    timeout: float = 60.0
    cache_path: str | None = None

    def __post_init__(self) -> None:
        for ph in ("{report}", "{labels}"):
            if ph not in self.prompt_template:
                raise ValueError(f"prompt_template is missing the {ph} placeholder")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")

    def render(self, report_text: str, labels: Sequence[str]) -> str:
        listing = "\n".join(f"- {name}" for name in labels)
        return self.prompt_template.replace("{labels}", listing).replace("{report}", report_text)


def _binary(value) -> int | None:
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, int) and value in (0, 1):
        return value
    if isinstance(value, float) and value in (0.0, 1.0):
        return int(value)
    if isinstance(value, str) and value.strip() in ("0", "1"):
        return int(value.strip())
    return None


def _first_object(raw: str) -> dict | None:
    decoder = json.JSONDecoder()
    pos = raw.find("{")
    while pos != -1:
        try:
            obj, _ = decoder.raw_decode(raw, pos)
        except json.JSONDecodeError:
            obj = None
        if isinstance(obj, dict):
            return obj
        pos = raw.find("{", pos + 1)
    return None


def parse_structured_response(
    raw: str, labels: Sequence[str], sample_id: str = ""
) -> LabelAssignment:
    """Pull the first JSON object out of ``raw`` and validate it against ``labels``.

    Surrounding prose and code fences are ignored. A ``{"labels": {...}}``
    wrapper is unwrapped.
    """
    obj = _first_object(raw)
    if obj is None:
        raise ResponseParseError("no parsable object in response")
    if set(obj) == {"labels"} and isinstance(obj["labels"], dict):
        obj = obj["labels"]
    expected = set(labels)
    unknown = sorted(set(obj) - expected)
    if unknown:
        raise ResponseParseError(f"unknown label names: {unknown}")
    bad = {k: v for k, v in obj.items() if _binary(v) is None}
    if bad:
        raise ResponseParseError(f"non-binary value(s): {bad}")
    missing = [name for name in labels if name not in obj]
    if missing:
        raise SchemaViolationError(f"response is missing labels: {missing}", missing)
    return LabelAssignment(sample_id, {name: _binary(obj[name]) for name in labels})


class HttpTransport:
    """POST the request body as JSON; return the assistant text or the raw body."""

    def __init__(self, endpoint: str, timeout: float = 60.0, api_key: str | None = None):
        self.endpoint = endpoint
        self.timeout = timeout
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)

    def __call__(self, body: dict) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        req = urllib.request.Request(
            self.endpoint, data=json.dumps(body).encode(), headers=headers, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                text = resp.read().decode("utf-8", errors="replace")
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise TransportError(str(exc)) from exc
        try:
            payload = json.loads(text)
            return payload["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError):
            return text


class ResponseCache:
    """Content-addressed reply store: one file per request hash.

    Writes go through a temp file and ``os.replace`` so concurrent writers of
    the same key never leave a torn file.
    """

    def __init__(self, directory: str | os.PathLike):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    @staticmethod
    def key(model_name: str, prompt: str) -> str:
        return hashlib.sha256(f"{model_name}\0{prompt}".encode()).hexdigest()

    def get(self, key: str) -> str | None:
        path = self.directory / f"{key}.json"
        try:
            return json.loads(path.read_text())["response"]
        except (FileNotFoundError, ValueError, KeyError):
            return None

    def put(self, key: str, response: str) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
        with os.fdopen(fd, "w") as fh:
            json.dump({"response": response}, fh)
        os.replace(tmp, self.directory / f"{key}.json")


class LlmExtractor:
    def __init__(
        self,
        config: ExtractorConfig,
        transport: Transport | None = None,
        cache: ResponseCache | None = None,
    ):
        self.config = config
        self.transport = transport or HttpTransport(config.endpoint, config.timeout)
        if cache is None and config.cache_path:
            cache = ResponseCache(config.cache_path)
        self.cache = cache
        self._lock = threading.Lock()
        self.requests = 0
        self.retries = 0
        self.cache_hits = 0

    def _bump(self, name: str) -> None:
        with self._lock:
            setattr(self, name, getattr(self, name) + 1)

    def request_body(self, prompt: str) -> dict:
        return {
            "model": self.config.model_name,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        }

    def label(self, report_text: str, labels: Sequence[str], sample_id: str = "") -> LabelAssignment:
        prompt = self.config.render(report_text, labels)
        key = ResponseCache.key(self.config.model_name, prompt)
        if self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                self._bump("cache_hits")
                return parse_structured_response(hit, labels, sample_id)

        body = self.request_body(prompt)
        last: str | None = None
        attempts = self.config.max_retries + 1
        for attempt in range(attempts):
            if attempt:
                self._bump("retries")
            self._bump("requests")
            try:
                last = self.transport(body)
            except TransportError as exc:
                logger.warning("sample %s: transport error (%s)", sample_id, exc)
                continue
            try:
                assignment = parse_structured_response(last, labels, sample_id)
            except ResponseParseError as exc:
                logger.warning("sample %s: malformed response (%s)", sample_id, exc)
                continue
            if self.cache is not None:
                self.cache.put(key, last)
            return assignment
        raise ExtractionFailure(
            f"sample {sample_id!r}: extraction failed after {attempts} attempt(s)", last, attempts
        )

    def label_many(
        self,
        reports: Mapping[str, str],
        labels: Sequence[str],
        schema_level: int = 1,
        max_workers: int = 4,
    ) -> LabelMatrix:
        ids = sorted(reports)
        with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
            rows = list(pool.map(lambda sid: self.label(reports[sid], labels, sid), ids))
        return LabelMatrix(schema_level, tuple(labels), tuple(rows))


def llm_label(
    report_text: str,
    labels: Sequence[str],
    config: ExtractorConfig,
    transport: Transport | None = None,
    sample_id: str = "",
) -> LabelAssignment:
    return LlmExtractor(config, transport).label(report_text, labels, sample_id)
