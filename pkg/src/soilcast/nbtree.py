"""NBTree: a decision tree grown by cross-validated naive-Bayes utility, with naive-Bayes leaves."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .c45 import C45Params, evaluate_candidates, partition
from .dataset import Dataset, stratified_fold_ids
from .naive_bayes import fit_arrays
from .tree import FRACTIONAL, Internal, Leaf, Node, TreeModel, classify, empty_leaf

# candidate tests come from the C4.5 search; utility, not gain, decides between them
_CANDIDATE_PARAMS = C45Params(pruning=False, mean_gain_filter=False)


@dataclass(frozen=True)
class NBTreeParams:
    utility_folds: int = 5
    min_node_size: float = 30.0
    min_relative_error_reduction: float = 0.05
    seed: int = 1

    def __post_init__(self):
        if self.utility_folds < 2:
            raise ValueError("utility_folds must be at least 2")
        if not self.min_node_size > 0 or not self.min_relative_error_reduction > 0:
            raise ValueError("thresholds must be positive")


def _utility(X, y, w, attributes, features, n_classes, params: NBTreeParams) -> float:
    total = w.sum()
    if total < params.utility_folds or y.size < params.utility_folds:
        model = fit_arrays(X, y, w, attributes, features, n_classes)
        pred = np.argmax(model.predict_proba(X), axis=1)
        return float(w[pred == y].sum() / total)
    folds = stratified_fold_ids(y, params.utility_folds, params.seed)
    correct = 0.0
    for f in range(params.utility_folds):
        tr, te = folds != f, folds == f
        if w[tr].sum() <= 0 or not te.any():
            continue
        model = fit_arrays(X[tr], y[tr], w[tr], attributes, features, n_classes)
        pred = np.argmax(model.predict_proba(X[te]), axis=1)
        correct += w[te][pred == y[te]].sum()
    return float(correct / total)


def node_utility(d: Dataset, params: NBTreeParams = NBTreeParams()) -> float:
    """Cross-validated naive-Bayes accuracy on ``d`` (resubstitution when too small)."""
    w = np.asarray(d.weights, dtype=float)
    if w.sum() <= 0:
        raise ValueError("view has no weight")
    return _utility(d.values, d.labels, w, d.attributes, d.feature_indices, d.n_classes, params)


def _leaf(X, y, w, attributes, features, n_classes, dist) -> Leaf:
    return Leaf(dist, model=fit_arrays(X, y, w, attributes, features, n_classes))


def _grow(X, y, w, attributes, features, n_classes, params: NBTreeParams) -> Node:
    dist = np.bincount(y, weights=w, minlength=n_classes)
    total = dist.sum()
    if total < params.min_node_size or (dist > 0).sum() <= 1:
        return _leaf(X, y, w, attributes, features, n_classes, dist)
    base_error = 1.0 - _utility(X, y, w, attributes, features, n_classes, params)
    best = None
    for cand in evaluate_candidates(X, y, w, attributes, features, n_classes, _CANDIDATE_PARAMS):
        parts, _ = partition(X, y, w, cand.test)
        u = 0.0
        for rows, wts in parts:
            if wts.sum() > 0:
                u += wts.sum() / total * _utility(X[rows], y[rows], wts, attributes, features,
                                                   n_classes, params)
        if best is None or u > best[0] + 1e-12:
            best = (u, cand.test, parts)
    if best is None:
        return _leaf(X, y, w, attributes, features, n_classes, dist)
    split_error = 1.0 - best[0]
    if base_error - split_error <= params.min_relative_error_reduction * base_error:
        return _leaf(X, y, w, attributes, features, n_classes, dist)
    test, parts = best[1], best[2]
    children = []
    bw = []
    b = test.branches(X)
    for i, (rows, wts) in enumerate(parts):
        bw.append(w[b == i].sum())
        if wts.sum() > 0:
            children.append(_grow(X[rows], y[rows], wts, attributes, features, n_classes, params))
        else:
            children.append(empty_leaf(n_classes, dist))
    return Internal(test, children, dist, np.array(bw))


def induce_nbtree(d: Dataset, params: NBTreeParams = NBTreeParams()) -> Node:
    if d.n_instances == 0 or d.weights.sum() <= 0:
        raise ValueError("cannot induce a tree from an empty dataset")
    return _grow(d.values, d.labels, np.asarray(d.weights, dtype=float), d.attributes,
                 d.feature_indices, d.n_classes, params)


def classify_nb(root: Node, row) -> np.ndarray:
    return classify(root, row, FRACTIONAL)


def fit(d: Dataset, params: NBTreeParams = NBTreeParams()) -> TreeModel:
    return TreeModel(induce_nbtree(d, params), d.n_classes, len(d.attributes), "nbtree", FRACTIONAL)


def params_dict(params: NBTreeParams) -> dict:
    return asdict(params)
