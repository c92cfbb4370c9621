import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from crgscore.schema import (
    AlignmentError,
    ConfusionCounts,
    LabelAssignment,
    LabelDef,
    LabelError,
    LabelMatrix,
    LabelSchema,
    SchemaError,
    align_corpora,
    confusion_from_labels,
    validate_schema,
)
from oracles import brute_confusion


def test_minimal_schema_is_valid():
    schema = LabelSchema.from_names(["a", "b"])
    assert validate_schema(schema) is schema


def test_dangling_parent_reported():
    schema = LabelSchema(
        ((LabelDef("opacity", 1),), (LabelDef("ggo_left", 2, parent="x"),)), "t"
    )
    with pytest.raises(SchemaError, match="dangling parent") as exc:
        validate_schema(schema)
    assert exc.value.problems[0][:2] == (2, "ggo_left")


def test_duplicate_label_reported():
    schema = LabelSchema.from_names(["nodule", "nodule", "emphysema"])
    with pytest.raises(SchemaError, match="duplicate label"):
        validate_schema(schema)


def test_every_violation_listed():
    schema = LabelSchema(
        (
            (LabelDef("a", 1), LabelDef("a", 1)),
            (),
            (LabelDef("c", 3, parent="zz"),),
        )
    )
    with pytest.raises(SchemaError) as exc:
        validate_schema(schema)
    messages = [p[2] for p in exc.value.problems]
    assert "duplicate label" in messages
    assert "empty level" in messages
    assert any("dangling parent" in m for m in messages)


def test_assignment_keys_must_match_level():
    with pytest.raises(LabelError, match="missing"):
        LabelMatrix(1, ("a", "b"), (LabelAssignment("s1", {"a": 1}),))
    with pytest.raises(LabelError, match="non-binary"):
        LabelMatrix(1, ("a",), (LabelAssignment("s1", {"a": 2}),))


def test_duplicate_sample_ids_rejected():
    rows = (LabelAssignment("s1", {"a": 1}), LabelAssignment("s1", {"a": 0}))
    with pytest.raises(LabelError, match="s1"):
        LabelMatrix(1, ("a",), rows)


def _m(ids, arr, labels=("a", "b"), level=1):
    return LabelMatrix.from_array(np.array(arr), labels, ids, level)


def test_align_identical_ids():
    pred = _m(["s2", "s1"], [[1, 0], [0, 1]])
    ref = _m(["s1", "s2"], [[0, 1], [1, 1]])
    aligned = align_corpora(pred, ref)
    assert aligned.sample_ids == ("s1", "s2")
    np.testing.assert_array_equal(aligned.predictions, [[0, 1], [1, 0]])
    np.testing.assert_array_equal(aligned.references, [[0, 1], [1, 1]])


def test_align_strict_names_missing_sample():
    pred = _m(["s1"], [[1, 0]])
    ref = _m(["s1", "s2"], [[1, 0], [0, 0]])
    with pytest.raises(AlignmentError, match="s2") as exc:
        align_corpora(pred, ref, strict=True)
    assert exc.value.missing == ["s2"]


def test_align_lenient_drops():
    pred = _m(["s1"], [[1, 0]])
    ref = _m(["s1", "s2"], [[1, 0], [0, 0]])
    aligned = align_corpora(pred, ref, strict=False)
    assert aligned.sample_ids == ("s1",)
    assert aligned.dropped == ("s2",)


def test_align_rejects_level_and_label_mismatch():
    with pytest.raises(AlignmentError, match="level"):
        align_corpora(_m(["s1"], [[1, 0]], level=2), _m(["s1"], [[1, 0]]))
    with pytest.raises(AlignmentError, match="label-set"):
        align_corpora(_m(["s1"], [[1, 0]], labels=("a", "c")), _m(["s1"], [[1, 0]]))


def test_align_reorders_columns_by_reference():
    pred = _m(["s1"], [[1, 0]], labels=("b", "a"))
    ref = _m(["s1"], [[1, 0]], labels=("a", "b"))
    aligned = align_corpora(pred, ref)
    np.testing.assert_array_equal(aligned.predictions, [[0, 1]])


def test_confusion_perfect_prediction():
    arr = [[1, 0], [0, 0], [0, 1]]
    aligned = align_corpora(_m(["a", "b", "c"], arr), _m(["a", "b", "c"], arr))
    assert confusion_from_labels(aligned).total == ConfusionCounts(2, 0, 0, 4)


def test_confusion_all_zero_prediction():
    ref = [[1, 0], [0, 0], [0, 1]]
    aligned = align_corpora(_m(["a", "b", "c"], np.zeros((3, 2))), _m(["a", "b", "c"], ref))
    assert confusion_from_labels(aligned).total == ConfusionCounts(0, 2, 0, 4)


def test_confusion_matches_brute_force_4x3():
    rng = np.random.default_rng(7)
    for _ in range(50):
        p = rng.integers(0, 2, (4, 3))
        r = rng.integers(0, 2, (4, 3))
        ids = [f"s{i}" for i in range(4)]
        aligned = align_corpora(
            _m(ids, p, ("x", "y", "z")), _m(ids, r, ("x", "y", "z"))
        )
        got = confusion_from_labels(aligned).total
        assert (got.tp, got.fn, got.fp, got.tn) == brute_confusion(p, r)


def test_mask_excludes_cells():
    ref = np.array([[1, 1], [0, 1]])
    pred = np.array([[1, 0], [1, 1]])
    aligned = align_corpora(_m(["a", "b"], pred), _m(["a", "b"], ref))
    mask = np.array([[1, 0], [1, 1]])
    assert confusion_from_labels(aligned, mask).total == ConfusionCounts(tp=2, fn=0, fp=1, tn=0)


def test_counts_reject_negative():
    with pytest.raises(ValueError):
        ConfusionCounts(-1, 0, 0, 0)


matrices = st.integers(1, 8).flatmap(
    lambda n: st.integers(1, 5).flatmap(
        lambda m: st.tuples(
            arrays(np.uint8, (n, m), elements=st.integers(0, 1)),
            arrays(np.uint8, (n, m), elements=st.integers(0, 1)),
        )
    )
)


def _aligned(p, r):
    labels = tuple(f"l{j}" for j in range(p.shape[1]))
    ids = [f"s{i:02d}" for i in range(p.shape[0])]
    return align_corpora(_m(ids, p, labels), _m(ids, r, labels))


@given(matrices)
def test_cells_partition_total(pr):
    p, r = pr
    conf = confusion_from_labels(_aligned(p, r))
    assert conf.total.total == p.size
    summed = ConfusionCounts()
    for c in conf.per_label.values():
        summed = summed + c
    assert summed == conf.total


@given(matrices)
def test_self_comparison_has_no_errors(pr):
    _, r = pr
    total = confusion_from_labels(_aligned(r, r)).total
    assert total.fn == 0 and total.fp == 0


@given(matrices, st.randoms(use_true_random=False))
def test_permutation_invariance(pr, rnd):
    p, r = pr
    order = list(range(p.shape[0]))
    rnd.shuffle(order)
    labels = tuple(f"l{j}" for j in range(p.shape[1]))
    ids = [f"s{i:02d}" for i in range(p.shape[0])]
    shuffled_ids = [ids[i] for i in order]
    a = confusion_from_labels(_aligned(p, r)).total
    b = confusion_from_labels(
        align_corpora(_m(shuffled_ids, p[order], labels), _m(ids, r, labels))
    ).total
    assert a == b
