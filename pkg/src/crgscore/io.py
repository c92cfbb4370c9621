"""Readers and writers for schemas, label matrices, report corpora, counts and rules.

Schemas, rule files and counts files are YAML (JSON is accepted too, being a
YAML subset). Label matrices and report corpora are JSON Lines.

Label matrix layout::

    {"header": {"schema_level": 1, "labels": ["a", "b"], "schema_version": "1"}}
    {"sample_id": "s1", "labels": {"a": 0, "b": 1}}
"""

from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path
from typing import Iterator, Sequence

import yaml

from crgscore.labeler.rules import (
    DEFAULT_NEGATION_CUES,
    DEFAULT_UNCERTAINTY_CUES,
    LabelRule,
    RuleSet,
)
from crgscore.schema import (
    ConfusionCounts,
    LabelAssignment,
    LabelDef,
    LabelError,
    LabelMatrix,
    LabelSchema,
    validate_schema,
)

PathLike = str | os.PathLike


class RecordError(ValueError):
    """A malformed record, reported with its file location."""

    def __init__(self, path: PathLike, line: int | None, message: str):
        self.path, self.line = str(path), line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def _load_tree(path: PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise RecordError(path, mark.line + 1 if mark else None, str(exc)) from exc


def _jsonl(path: PathLike) -> Iterator[tuple[int, dict]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordError(path, lineno, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict):
                raise RecordError(path, lineno, "record is not an object")
            yield lineno, record


# -- schema -----------------------------------------------------------------


def schema_from_dict(data: dict) -> LabelSchema:
    levels = []
    for k, level in enumerate(data.get("levels") or [], start=1):
        defs = []
        for entry in level.get("labels") or []:
            if isinstance(entry, str):
                entry = {"name": entry}
            defs.append(LabelDef(str(entry["name"]), k, entry.get("parent")))
        levels.append(tuple(defs))
    return LabelSchema(tuple(levels), str(data.get("version", "1")))


def schema_to_dict(schema: LabelSchema) -> dict:
    return {
        "version": schema.version,
        "levels": [
            {
                "labels": [
                    {"name": d.name, **({"parent": d.parent} if d.parent else {})} for d in level
                ]
            }
            for level in schema.levels
        ],
    }


def load_schema(path: PathLike) -> LabelSchema:
    data = _load_tree(path)
    if not isinstance(data, dict):
        raise RecordError(path, None, "schema file must hold a mapping")
    try:
        schema = schema_from_dict(data)
    except (KeyError, TypeError, AttributeError) as exc:
        raise RecordError(path, None, f"malformed schema entry: {exc}") from exc
    return validate_schema(schema)


def emit_schema(schema: LabelSchema, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump(schema_to_dict(schema), fh, sort_keys=False)


def default_schema() -> LabelSchema:
    with resources.as_file(resources.files("crgscore") / "data" / "ct_rate_schema.yaml") as p:
        return load_schema(p)


# -- label matrices -----------------------------------------------------------


def load_label_matrix(
    path: PathLike,
    schema: LabelSchema | None = None,
    level: int | None = None,
) -> LabelMatrix:
    """Read a label matrix file.

    The level comes from the header record, else ``level``, else 1. Labels come
    from the header, else the schema level, else the first row's keys.
    """
    header: dict | None = None
    raw_rows: list[tuple[int, dict]] = []
    for lineno, record in _jsonl(path):
        if "header" in record:
            if header is not None or raw_rows:
                raise RecordError(path, lineno, "header must be the first record")
            header = record["header"]
            continue
        raw_rows.append((lineno, record))

    lvl = int((header or {}).get("schema_level", level or 1))
    if level is not None and lvl != level:
        raise RecordError(path, None, f"file holds level {lvl}, expected level {level}")
    labels: Sequence[str] | None = (header or {}).get("labels")
    if labels is None and schema is not None:
        labels = schema.label_names(lvl)
    if labels is None and raw_rows:
        labels = list(raw_rows[0][1].get("labels", {}))
    labels = tuple(labels or ())
    if schema is not None and set(labels) != set(schema.label_names(lvl)):
        diff = sorted(set(labels) ^ set(schema.label_names(lvl)))
        raise RecordError(path, None, f"labels do not match schema level {lvl}: {diff}")

    rows = []
    seen: set[str] = set()
    for lineno, record in raw_rows:
        sid = record.get("sample_id")
        values = record.get("labels")
        if not isinstance(sid, str) or not isinstance(values, dict):
            raise RecordError(path, lineno, "record needs string 'sample_id' and object 'labels'")
        if sid in seen:
            raise RecordError(path, lineno, f"duplicate sample_id {sid!r}")
        seen.add(sid)
        row = LabelAssignment(sid, values)
        try:
            row.check(labels)
        except LabelError as exc:
            raise RecordError(path, lineno, str(exc)) from exc
        rows.append(row)
    return LabelMatrix(lvl, labels, tuple(rows))


def dump_label_matrix(matrix: LabelMatrix, schema_version: str | None = None) -> str:
    header = {"schema_level": matrix.schema_level, "labels": list(matrix.labels)}
    if schema_version is not None:
        header["schema_version"] = schema_version
    lines = [json.dumps({"header": header})]
    for row in matrix.rows:
        values = {name: int(row.values[name]) for name in matrix.labels}
        lines.append(json.dumps({"sample_id": row.sample_id, "labels": values}))
    return "\n".join(lines) + "\n"


def emit_label_matrix(
    matrix: LabelMatrix, path: PathLike, schema_version: str | None = None
) -> None:
    Path(path).write_text(dump_label_matrix(matrix, schema_version), encoding="utf-8")


# -- report corpora -----------------------------------------------------------


def load_reports(path: PathLike) -> dict[str, str]:
    """``{sample_id: text}`` in file order."""
    out: dict[str, str] = {}
    for lineno, record in _jsonl(path):
        sid, text = record.get("sample_id"), record.get("text")
        if not isinstance(sid, str) or not isinstance(text, str):
            raise RecordError(path, lineno, "record needs string 'sample_id' and 'text'")
        if sid in out:
            raise RecordError(path, lineno, f"duplicate sample_id {sid!r}")
        out[sid] = text
    return out


def emit_reports(reports: dict[str, str], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for sid, text in reports.items():
            fh.write(json.dumps({"sample_id": sid, "text": text}) + "\n")


# -- counts -------------------------------------------------------------------


def load_counts(path: PathLike) -> ConfusionCounts:
    data = _load_tree(path)
    if not isinstance(data, dict):
        raise RecordError(path, None, "counts file must hold a mapping")
    data = {str(k).lower(): v for k, v in data.items()}
    missing = [k for k in ("tp", "fn", "fp", "tn") if k not in data]
    if missing:
        raise RecordError(path, None, f"missing count(s): {missing}")
    try:
        return ConfusionCounts(data["tp"], data["fn"], data["fp"], data["tn"])
    except (TypeError, ValueError) as exc:
        raise RecordError(path, None, str(exc)) from exc


def emit_counts(counts: ConfusionCounts, path: PathLike) -> None:
    Path(path).write_text(json.dumps(counts.as_dict()) + "\n", encoding="utf-8")


# -- rules --------------------------------------------------------------------


def ruleset_from_dict(data: dict) -> RuleSet:
    cues = tuple(data.get("negation_cues") or DEFAULT_NEGATION_CUES)
    window = int(data.get("window", 6))
    rules = []
    for entry in data.get("rules") or []:
        rules.append(
            LabelRule(
                label=str(entry["label"]),
                triggers=tuple(str(t) for t in entry["triggers"]),
                negation_cues=tuple(entry.get("negation_cues") or cues),
                window=int(entry.get("window", window)),
            )
        )
    return RuleSet(
        tuple(rules),
        uncertainty_cues=tuple(data.get("uncertainty_cues") or DEFAULT_UNCERTAINTY_CUES),
        uncertain_as=data.get("uncertain_as", "positive"),
        uncertainty_window=int(data.get("uncertainty_window", window)),
        version=str(data.get("version", "1")),
        level=int(data.get("level", 1)),
    )


def load_rules(path: PathLike) -> RuleSet:
    data = _load_tree(path)
    if not isinstance(data, dict):
        raise RecordError(path, None, "rule file must hold a mapping")
    try:
        return ruleset_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordError(path, None, f"malformed rule: {exc}") from exc


def default_rules() -> RuleSet:
    with resources.as_file(resources.files("crgscore") / "data" / "ct_rate_rules.yaml") as p:
        return load_rules(p)
