import json

import numpy as np
import pytest

from crgscore import io as cio
from crgscore.schema import ConfusionCounts, LabelDef, LabelMatrix, LabelSchema, SchemaError


def test_shipped_schema_and_rules():
    schema = cio.default_schema()
    assert schema.depth == 1 and len(schema.label_names(1)) == 18
    rules = cio.default_rules()
    assert {r.label for r in rules.rules} == set(schema.label_names(1))
    assert "no" in rules.rules[0].negation_cues


def test_schema_round_trip(tmp_path):
    schema = LabelSchema(
        ((LabelDef("opacity", 1), LabelDef("nodule", 1)), (LabelDef("ggo_left", 2, "opacity"),)),
        "v2",
    )
    path = tmp_path / "s.yaml"
    cio.emit_schema(schema, path)
    assert cio.load_schema(path) == schema


def test_schema_file_validated(tmp_path):
    path = tmp_path / "s.yaml"
    path.write_text("version: x\nlevels:\n  - labels: [{name: a}, {name: a}]\n")
    with pytest.raises(SchemaError, match="duplicate"):
        cio.load_schema(path)


def test_label_matrix_round_trip(tmp_path):
    m = LabelMatrix.from_array(np.array([[1, 0], [0, 0], [1, 1]]), ("x", "y"), ["s1", "s2", "s3"], 2)
    path = tmp_path / "m.jsonl"
    cio.emit_label_matrix(m, path)
    assert cio.load_label_matrix(path) == m


def test_label_matrix_duplicate_id(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text(
        '{"sample_id": "s1", "labels": {"a": 1}}\n{"sample_id": "s1", "labels": {"a": 0}}\n'
    )
    with pytest.raises(cio.RecordError, match=r"m.jsonl:2: duplicate sample_id 's1'"):
        cio.load_label_matrix(path)


def test_label_matrix_unknown_label(tmp_path):
    path = tmp_path / "m.jsonl"
    path.write_text('{"sample_id": "s1", "labels": {"a": 1, "zz": 0}}\n')
    schema = LabelSchema.from_names(["a"])
    with pytest.raises(cio.RecordError, match="zz"):
        cio.load_label_matrix(path, schema)


def test_malformed_line_location(tmp_path):
    path = tmp_path / "r.jsonl"
    path.write_text('{"sample_id": "a", "text": "x"}\n{oops\n')
    with pytest.raises(cio.RecordError, match=r"r.jsonl:2"):
        cio.load_reports(path)


def test_reports_round_trip(tmp_path):
    reports = {"b": "No effusion.", "a": "Nodule 5.5 mm."}
    path = tmp_path / "r.jsonl"
    cio.emit_reports(reports, path)
    assert cio.load_reports(path) == reports


def test_counts_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"TP": 2224, "FN": 8311, "FP": 3081, "TN": 41086}))
    assert cio.load_counts(path) == ConfusionCounts(2224, 8311, 3081, 41086)
    cio.emit_counts(ConfusionCounts(1, 2, 3, 4), path)
    assert cio.load_counts(path) == ConfusionCounts(1, 2, 3, 4)


def test_counts_file_missing_field(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("tp: 1\nfn: 2\n")
    with pytest.raises(cio.RecordError, match="missing"):
        cio.load_counts(path)


def test_rules_file(tmp_path):
    path = tmp_path / "rules.yaml"
    path.write_text(
        "level: 2\nwindow: 3\nuncertain_as: negative\nrules:\n"
        "  - label: ggo_left\n    triggers: [left ground glass]\n    window: 1\n"
    )
    rs = cio.load_rules(path)
    assert rs.level == 2 and rs.uncertain_as == "negative"
    assert rs.rules[0].window == 1 and rs.rules[0].triggers == ("left ground glass",)
