import logging

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from soilcast.dataset import (
    FERTILITY_LEVELS, NOMINAL, SOIL_ATTRIBUTES, AttributeSpec, DataError, Dataset, add_noise_attributes,
    load_csv, read_csv, soil_class_means, stratified_fold_ids, stratified_k_folds, synthesize_soil_dataset,
    write_csv,
)


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_load_small_file(tmp_path):
    p = _write(tmp_path, "ph,ec,label\n6.5,0.2,low\n7.1,0.4,high\n5.9,0.1,low\n")
    d = load_csv(p)
    assert d.n_instances == 3
    assert [a.kind for a in d.attributes] == ["numeric", "numeric", "nominal"]
    assert d.class_attribute.nominal_values == ("low", "high")
    assert d.labels.tolist() == [0, 1, 0]
    assert d.weights.tolist() == [1.0, 1.0, 1.0]


def test_missing_token_keeps_row(tmp_path):
    p = _write(tmp_path, "ph,ec,label\n6.5,?,low\n7.1,0.4,high\n")
    d = load_csv(p)
    assert d.n_instances == 2
    assert np.isnan(d.values[0, 1])


def test_malformed_rows(tmp_path):
    with pytest.raises(DataError, match=":3"):
        load_csv(_write(tmp_path, "a,b,label\n1,2,x\n1,2\n"))
    with pytest.raises(DataError, match="non-numeric"):
        load_csv(_write(tmp_path, "a,b,label\n1,2,x\n1,oops,y\n"))


def test_missing_class_rows_rejected(tmp_path, caplog):
    p = _write(tmp_path, "a,label\n1,x\n2,?\n3,y\n")
    d, summary = read_csv(p)
    assert d.n_instances == 2
    assert summary.rows_rejected == 1 and summary.rejected_lines == [3]
    with caplog.at_level(logging.WARNING):
        load_csv(p)
    assert "rejected 1 row" in caplog.text


def test_class_column_by_name_and_nominal_features(tmp_path):
    p = _write(tmp_path, "label,soil,x\nlow,clay,1\nhigh,sand,2\n")
    d = load_csv(p, class_column="label")
    assert d.class_index == 0
    assert d.attributes[1].kind == NOMINAL
    assert d.attributes[1].nominal_values == ("clay", "sand")


def test_soil_schema_roundtrip(tmp_path):
    d = synthesize_soil_dataset(1988, 7, 2.0)
    p = tmp_path / "soil.csv"
    write_csv(d, p)
    back = load_csv(p)
    assert back.n_instances == 1988
    assert back.names == list(SOIL_ATTRIBUTES) + ["label"]
    assert sum(not a.is_nominal for a in back.attributes) == 9
    assert set(back.class_attribute.nominal_values) == set(FERTILITY_LEVELS)
    assert back.decoded_rows() == d.decoded_rows()


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.one_of(st.none(), st.floats(-1e6, 1e6, allow_nan=False)),
                          st.sampled_from(["a", "b", "c d"])), min_size=1, max_size=20))
def test_csv_roundtrip_property(tmp_path_factory, rows):
    attrs = (AttributeSpec("x"), AttributeSpec("y", NOMINAL, ("a", "b", "c d")))
    values = [[np.nan if x is None else x, ["a", "b", "c d"].index(c)] for x, c in rows]
    if all(x is None for x, _ in rows):
        values[0][0] = 1.5
    d = Dataset(attrs, 1, np.array(values))
    p = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(d, p)
    back = load_csv(p)
    assert back.decoded_rows() == d.decoded_rows()


def test_dataset_validation():
    attrs = (AttributeSpec("x"), AttributeSpec("c", NOMINAL, ("a", "b")))
    with pytest.raises(ValueError):
        Dataset(attrs, 0, np.zeros((2, 2)))          # numeric class
    with pytest.raises(ValueError):
        Dataset(attrs, 1, np.array([[1.0, 2.0]]))    # code out of range
    with pytest.raises(ValueError):
        Dataset(attrs, 1, np.array([[1.0, 0.0]]), np.array([-1.0]))
    with pytest.raises(ValueError):
        AttributeSpec("c", NOMINAL, ("a", "a"))
    d = Dataset(attrs, 1, np.array([[1.0, 0.0]]))
    with pytest.raises(ValueError):
        d.values[0, 0] = 3.0


def test_folds_perfect_divisibility():
    labels = np.array([0] * 5 + [1] * 5)
    f = stratified_fold_ids(labels, 5, 3)
    for k in range(5):
        assert sorted(labels[f == k].tolist()) == [0, 1]


def test_folds_1988():
    d = synthesize_soil_dataset(1988, 7, 2.0)
    folds = stratified_k_folds(d, 10, 1)
    assert sorted(folds.sizes()) == [198] * 2 + [199] * 8
    assert stratified_k_folds(d, 10, 1) == folds
    assert stratified_k_folds(d, 10, 2) != folds


def test_folds_reject_too_many():
    with pytest.raises(ValueError):
        stratified_fold_ids(np.array([0, 1, 0]), 4, 1)


@settings(max_examples=60)
@given(st.lists(st.integers(0, 4), min_size=2, max_size=120), st.integers(2, 10), st.integers(0, 2**64 - 1))
def test_fold_invariants(labels, k, seed):
    labels = np.array(labels)
    if k > labels.size:
        return
    f = stratified_fold_ids(labels, k, seed)
    assert f.min() >= 0 and f.max() < k
    sizes = np.bincount(f, minlength=k)
    assert sizes.sum() == labels.size and sizes.max() - sizes.min() <= 1
    for c in np.unique(labels):
        n_c = (labels == c).sum()
        per = np.bincount(f[labels == c], minlength=k)
        assert np.all(np.abs(per - n_c / k) < 1)


def test_synth_balance_and_determinism():
    a = synthesize_soil_dataset(600, 1, 3.0)
    assert a.class_counts().tolist() == [100] * 6
    b = synthesize_soil_dataset(600, 1, 3.0)
    assert a.values.tobytes() == b.values.tobytes()
    c = synthesize_soil_dataset(1988, 7, 2.0)
    assert set(c.class_counts().tolist()) <= {331, 332} and c.class_counts().sum() == 1988
    assert c.class_attribute.nominal_values == FERTILITY_LEVELS
    with pytest.raises(ValueError):
        synthesize_soil_dataset(59, 1)


@pytest.mark.parametrize("sep", [0.5, 2.0, 3.0])
def test_synth_means_monotone(sep):
    m = soil_class_means(sep)
    for name in ("OC", "P", "K"):
        col = m[:, SOIL_ATTRIBUTES.index(name)]
        assert np.all(np.diff(col) > 0)
        assert col.min() > 0


def test_synth_overlap_shrinks_with_separation():
    from soilcast.c45 import fit
    acc = []
    for sep in (0.5, 3.0):
        d = synthesize_soil_dataset(600, 3, sep)
        acc.append(np.mean(fit(d).predict(d.values) == d.labels))
    assert acc[1] > acc[0]


def test_noise_attributes():
    d = synthesize_soil_dataset(120, 1)
    e = add_noise_attributes(d, 3, 5)
    assert e.names[-4:] == ["noise0", "noise1", "noise2", "label"]
    assert e.class_index == d.class_index + 3
    assert np.array_equal(e.values[:, :9], d.values[:, :9])
    assert e.labels.tolist() == d.labels.tolist()
    assert e.n_instances == d.n_instances


def test_select_attributes_keeps_class_and_order():
    d = synthesize_soil_dataset(60, 1)
    r = d.select_attributes([4, 2, 3, 8])
    assert r.names == ["OC", "P", "K", "Cu", "label"]
    assert r.labels.tolist() == d.labels.tolist()
