import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from soilcast import c45
from soilcast.c45 import C45Params, best_split, estimated_errors, induce, pessimistic_error, prune_ebp
from soilcast.dataset import NOMINAL, AttributeSpec, Dataset, synthesize_soil_dataset
from soilcast.tree import (
    NUMERIC_THRESHOLD, Internal, Leaf, SplitTest, classify, count_leaves, depth, node_to_dict,
)

XOR = [((0, 0), 0), ((0, 1), 1), ((1, 0), 1), ((1, 1), 0)]
UNPRUNED = C45Params(pruning=False, min_instances_per_leaf=1)


def _numeric(values, labels, n_classes=2):
    attrs = (AttributeSpec("x"), AttributeSpec("y", NOMINAL, tuple("AB"[:n_classes] if n_classes <= 2 else "ABC")))
    return Dataset(attrs, 1, np.column_stack([values, labels]).astype(float))


def _train_accuracy(root, d):
    proba = np.array([classify(root, row) for row in d.values])
    return np.mean(np.argmax(proba, axis=1) == d.labels)


def test_pure_view_has_no_split():
    d = oracles.binary_dataset([((0,), 0), ((1,), 0), ((1,), 0), ((0,), 0)], 1)
    assert best_split(d) is None


@pytest.mark.parametrize("nominal", [False, True])
def test_perfect_binary_separator(nominal):
    rows = [((0, 1), 0)] * 2 + [((0, 0), 0)] * 2 + [((1, 0), 1)] * 2 + [((1, 1), 1)] * 2
    test, score = best_split(oracles.binary_dataset(rows, 2, nominal))
    assert test.attribute_index == 0
    assert score == pytest.approx(1.0, abs=1e-12)


def test_numeric_midpoint_threshold():
    d = _numeric([1, 2, 3, 4], [0, 0, 1, 1])
    test, score = best_split(d, C45Params(use_mdl_numeric_penalty=False))
    assert test.kind == NUMERIC_THRESHOLD and test.threshold == 2.5
    assert score == pytest.approx(1.0, abs=1e-12)


def test_mdl_penalty_reduces_gain():
    x = np.arange(20, dtype=float)
    y = (x >= 10).astype(int)
    y[[3, 15]] = 1 - y[[3, 15]]
    d = _numeric(x, y)
    _, with_penalty = best_split(d)
    _, without = best_split(d, C45Params(use_mdl_numeric_penalty=False))
    assert with_penalty < without


def test_single_class_dataset_is_one_leaf():
    d = _numeric([1, 2, 3, 4, 5], [1, 1, 1, 1, 1])
    root = induce(d)
    assert isinstance(root, Leaf) and root.predicted == 1


@pytest.mark.parametrize("nominal", [False, True])
def test_xor_learned_at_depth_two(nominal):
    root = induce(oracles.binary_dataset(XOR, 2, nominal), UNPRUNED)
    assert depth(root) == 2
    assert _train_accuracy(root, oracles.binary_dataset(XOR, 2, nominal)) == 1.0


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.tuples(st.integers(0, 3), st.integers(0, 2), st.integers(0, 4)),
                          st.integers(0, 2)), min_size=1, max_size=40))
def test_consistent_data_fit_exactly(rows):
    labelled = {}
    for x, y in rows:
        labelled.setdefault(x, y)
    X = np.array(list(labelled), dtype=float)
    y = np.array(list(labelled.values()))
    attrs = (AttributeSpec("a"), AttributeSpec("b"), AttributeSpec("c"), AttributeSpec("y", NOMINAL, ("p", "q", "r")))
    d = Dataset(attrs, 3, np.column_stack([X, y]))
    root = induce(d, C45Params(pruning=False, min_instances_per_leaf=1, use_mdl_numeric_penalty=False))
    assert _train_accuracy(root, d) == 1.0


def test_pessimistic_error_examples():
    assert pessimistic_error(3, 10, 0.5) == pytest.approx(0.3, abs=1e-15)
    assert pessimistic_error(0, 1e6, 0.25) < 1e-3
    exact = oracles.binomial_upper_limit(2, 14, 0.25)
    assert exact == pytest.approx(0.26122, abs=1e-5)
    assert pessimistic_error(2, 14, 0.25) == pytest.approx(0.21719, abs=1e-5)
    assert abs(pessimistic_error(2, 14, 0.25) - exact) <= 0.06


@pytest.mark.parametrize("args", [(-1, 5, 0.25), (6, 5, 0.25), (1, 0, 0.25), (1, 5, 0.0), (1, 5, 0.6)])
def test_pessimistic_error_rejects_bad_input(args):
    with pytest.raises(ValueError):
        pessimistic_error(*args)


@settings(max_examples=100)
@given(st.integers(1, 400), st.floats(0.01, 0.5), st.data())
def test_pessimistic_error_bounds(n, cf, data):
    e = data.draw(st.integers(0, n))
    u = pessimistic_error(e, n, cf)
    assert e / n - 1e-12 <= u <= 1.0


def _stump(left, right):
    test = SplitTest(0, NUMERIC_THRESHOLD, threshold=0.5)
    return Internal(test, [Leaf(np.array(left, float)), Leaf(np.array(right, float))],
                    np.add(left, right).astype(float))


def test_prune_collapses_uninformative_split():
    pruned = prune_ebp(_stump([5, 0], [3, 0]))
    assert isinstance(pruned, Leaf) and pruned.dist.tolist() == [8, 0]


def test_prune_leaf_unchanged():
    leaf = Leaf(np.array([3.0, 1.0]))
    assert prune_ebp(leaf) is leaf


def test_prune_stump_against_oracle():
    # leaves (5,1) and (6,1) both predict class 0; collapsed leaf has 2 of 13 wrong.
    # estimated errors: collapsed 13*U(2,13) = 3.02795, subtree 6*U(1,6) + 7*U(1,7) = 3.52769
    t = _stump([5, 1], [6, 1])
    assert estimated_errors(t, 0.25) == pytest.approx(3.52769, abs=1e-5)
    assert isinstance(prune_ebp(t), Leaf)
    # leaves (6,1) and (1,6) disagree; collapsed 14*U(7,14) = 8.24184 against 3.55320
    t = _stump([6, 1], [1, 6])
    assert estimated_errors(Leaf(t.dist), 0.25) == pytest.approx(8.24184, abs=1e-5)
    assert estimated_errors(t, 0.25) == pytest.approx(3.55320, abs=1e-5)
    assert isinstance(prune_ebp(t), Internal)


def test_prune_monotone_on_soil_data():
    d = synthesize_soil_dataset(300, 4, 1.0)
    full = induce(d, C45Params(pruning=False))
    pruned = prune_ebp(full)
    assert count_leaves(pruned) <= count_leaves(full)
    assert estimated_errors(pruned, 0.25) <= estimated_errors(full, 0.25) + 1e-9


def test_classify_examples():
    leaf = Leaf(np.array([3.0, 1.0]))
    assert classify(leaf, np.array([0.0, 0.0])).tolist() == [0.75, 0.25]
    stump = Internal(SplitTest(0, NUMERIC_THRESHOLD, threshold=2.5),
                     [Leaf(np.array([8.0, 0.0])), Leaf(np.array([0.0, 6.0]))], np.array([8.0, 6.0]))
    assert classify(stump, np.array([1.0, 0.0])).tolist() == [1.0, 0.0]
    p = classify(stump, np.array([np.nan, 0.0]))
    assert p == pytest.approx([8 / 14, 6 / 14], abs=1e-15)


def test_missing_values_in_training_split_fractionally():
    X = np.array([1, 2, 3, 4, 5, 6, np.nan, np.nan], dtype=float)
    y = np.array([0, 0, 0, 1, 1, 1, 0, 1])
    root = induce(_numeric(X, y), C45Params(pruning=False, min_instances_per_leaf=1,
                                             use_mdl_numeric_penalty=False))
    assert isinstance(root, Internal) and root.test.threshold == 3.5
    assert root.branch_weights.tolist() == [3.0, 3.0]
    # each missing instance sends half its weight down each branch
    assert [c.dist.tolist() for c in root.children] == [[3.5, 0.5], [0.5, 3.5]]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_posterior_normalised_with_missing(seed):
    rng = np.random.default_rng(seed)
    d = synthesize_soil_dataset(120, seed, 1.0)
    model = c45.fit(d)
    X = d.values.copy()
    X[rng.random(X.shape) < 0.3] = np.nan
    X[0, :] = np.nan
    p = model.predict_proba(X)
    assert np.allclose(p.sum(axis=1), 1.0, atol=1e-9)


def test_induce_is_deterministic():
    d = synthesize_soil_dataset(300, 9, 1.5)
    assert node_to_dict(induce(d)) == node_to_dict(induce(d))


def test_empty_dataset_rejected():
    d = _numeric(np.zeros(0), np.zeros(0))
    with pytest.raises(ValueError):
        induce(d)


def test_unseen_nominal_value_leaf_uses_parent_posterior():
    attrs = (AttributeSpec("s", NOMINAL, ("a", "b", "c")), AttributeSpec("y", NOMINAL, ("p", "q")))
    d = Dataset(attrs, 1, np.array([[0, 0]] * 3 + [[1, 1]] * 3 + [[0, 1]], dtype=float))
    root = induce(d, UNPRUNED)
    assert isinstance(root, Internal)
    unseen = root.children[2]
    assert unseen.total == 0
    assert unseen.posterior == pytest.approx(d.class_weights() / 7)


def test_root_split_matches_bruteforce_sample():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(1, 13))
        rows = [(tuple(int(v) for v in rng.integers(0, 2, 3)), int(rng.integers(0, 2))) for _ in range(n)]
        got = best_split(oracles.binary_dataset(rows, 3))
        want = oracles.c45_root_split(rows, 3)
        assert (got is None) == (want is None)
        if got is not None:
            assert got[0].attribute_index == want[0]
            assert got[1] == pytest.approx(want[1], abs=1e-9)
