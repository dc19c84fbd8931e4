"""CART-style classification trees: binary Gini splits and minimal cost-complexity pruning."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import Dataset, stratified_fold_ids
from .measures import gini_rows
from .tree import (
    HEAVIER, NOMINAL_BINARY, NUMERIC_THRESHOLD, Internal, Leaf, Node, SplitTest, TreeModel,
    batch_posterior, node_errors,
)

TIE_EPS = 1e-12


@dataclass(frozen=True)
class CartParams:
    min_instances_per_leaf: float = 2.0
    pruning_folds: int = 5
    use_one_se_rule: bool = True
    seed: int = 1

    def __post_init__(self):
        if not self.min_instances_per_leaf > 0:
            raise ValueError("min_instances_per_leaf must be positive")
        if self.pruning_folds < 2:
            raise ValueError("pruning_folds must be at least 2")


@dataclass
class PruneSequence:
    alphas: list[float] = field(default_factory=list)
    trees: list[Node] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.alphas)

    def tree_for_alpha(self, alpha: float) -> Node:
        """Last tree in the sequence whose alpha does not exceed ``alpha``."""
        i = int(np.searchsorted(np.asarray(self.alphas), alpha, side="right")) - 1
        return self.trees[max(i, 0)]


def _gini(v: np.ndarray) -> float:
    return float(gini_rows(v.reshape(1, -1))[0])


def _candidates(X, y, w, attributes, features, n_classes, min_leaf):
    """Yield (decrease, test) per attribute: its best binary partition."""
    for j in features:
        a = attributes[j]
        col = X[:, j]
        known = ~np.isnan(col)
        W = w.sum()
        wk = w[known].sum()
        if wk <= 0:
            continue
        if a.is_nominal:
            counts = np.zeros((len(a.nominal_values), n_classes))
            np.add.at(counts, (col[known].astype(int), y[known]), w[known])
            total = counts.sum(axis=0)
            left = counts
            right = total - left
            tests = [SplitTest(j, NOMINAL_BINARY, value=v) for v in range(len(a.nominal_values))]
        else:
            v, yk, wkk = col[known], y[known], w[known]
            order = np.argsort(v, kind="stable")
            v, yk, wkk = v[order], yk[order], wkk[order]
            pos = np.flatnonzero(v[1:] != v[:-1]) + 1
            if pos.size == 0:
                continue
            onehot = np.zeros((v.size, n_classes))
            onehot[np.arange(v.size), yk] = wkk
            cum = np.cumsum(onehot, axis=0)
            total = cum[-1]
            left = cum[pos - 1]
            right = total - left
            tests = None
            thresholds = (v[pos - 1] + v[pos]) / 2.0
        wl, wr = left.sum(axis=1), right.sum(axis=1)
        ok = (wl >= min_leaf) & (wr >= min_leaf)
        if not ok.any():
            continue
        dec = _gini(total) - (wl * gini_rows(left) + wr * gini_rows(right)) / wk
        dec = np.where(ok, wk / W * dec, -np.inf)
        i = int(np.flatnonzero(dec >= dec.max() - TIE_EPS)[0])
        test = tests[i] if tests is not None else SplitTest(j, NUMERIC_THRESHOLD, threshold=float(thresholds[i]))
        yield float(dec[i]), test


def _choose(X, y, w, attributes, features, n_classes, min_leaf, impure):
    cands = list(_candidates(X, y, w, attributes, features, n_classes, min_leaf))
    if not cands:
        return None
    best = max(dec for dec, _ in cands)
    if best <= TIE_EPS:
        # no partition reduces impurity: keep growing an impure node on the first valid partition
        return (0.0, cands[0][1]) if impure else None
    return next((dec, t) for dec, t in cands if dec >= best - TIE_EPS)


def best_binary_split(d: Dataset, params: CartParams = CartParams()) -> tuple[SplitTest, float] | None:
    """Best binary test by weighted Gini decrease as ``(test, decrease)``."""
    w = np.asarray(d.weights, dtype=float)
    if w.sum() <= 0:
        raise ValueError("view has no weight")
    y = d.labels
    dist = np.bincount(y, weights=w, minlength=d.n_classes)
    got = _choose(d.values, y, w, d.attributes, d.feature_indices, d.n_classes,
                  params.min_instances_per_leaf, (dist > 0).sum() > 1)
    return None if got is None else (got[1], got[0])


def _grow(X, y, w, attributes, features, n_classes, min_leaf) -> Node:
    dist = np.bincount(y, weights=w, minlength=n_classes)
    impure = (dist > 0).sum() > 1
    if dist.sum() < 2 * min_leaf or not impure:
        return Leaf(dist)
    got = _choose(X, y, w, attributes, features, n_classes, min_leaf, impure)
    if got is None:
        return Leaf(dist)
    test = got[1]
    b = test.branches(X)
    known = b >= 0
    bw = np.bincount(b[known], weights=w[known], minlength=2)
    b = np.where(known, b, int(np.argmax(bw)))
    children = [_grow(X[b == i], y[b == i], w[b == i], attributes, features, n_classes, min_leaf)
                for i in range(2)]
    return Internal(test, children, dist, bw)


def grow_full(d: Dataset, params: CartParams = CartParams()) -> Node:
    if d.n_instances == 0 or d.weights.sum() <= 0:
        raise ValueError("cannot grow a tree from an empty dataset")
    return _grow(d.values, d.labels, np.asarray(d.weights, dtype=float), d.attributes,
                 d.feature_indices, d.n_classes, params.min_instances_per_leaf)


def _link_strengths(node: Node, root_total: float, out: dict) -> tuple[float, int]:
    """Fill ``out[id(node)] = g(node)``; return (subtree error, leaf count)."""
    if isinstance(node, Leaf):
        return node_errors(node) / root_total, 1
    err, n_leaves = 0.0, 0
    for c in node.children:
        e, k = _link_strengths(c, root_total, out)
        err += e
        n_leaves += k
    out[id(node)] = (node_errors(node) / root_total - err) / (n_leaves - 1)
    return err, n_leaves


def _prune_weakest(node: Node, g: dict, alpha: float) -> Node:
    if isinstance(node, Leaf):
        return node
    if g[id(node)] <= alpha + TIE_EPS:
        return Leaf(node.dist)
    return Internal(node.test, [_prune_weakest(c, g, alpha) for c in node.children], node.dist,
                    node.branch_weights)


def cost_complexity_sequence(root: Node) -> PruneSequence:
    """Weakest-link pruning sequence with alphas in misclassification rate per leaf."""
    seq = PruneSequence([0.0], [root])
    root_total = root.dist.sum()
    current = root
    while isinstance(current, Internal):
        g: dict = {}
        _link_strengths(current, root_total, g)
        alpha = max(min(g.values()), seq.alphas[-1])
        current = _prune_weakest(current, g, alpha)
        seq.alphas.append(alpha)
        seq.trees.append(current)
    return seq


def _weighted_errors(node: Node, X, y, w) -> float:
    pred = np.argmax(batch_posterior(node, X, HEAVIER), axis=1)
    return float(w[pred != y].sum())


def select_pruned_tree(d: Dataset, params: CartParams = CartParams()) -> Node:
    """Grow on all data, then pick the pruned subtree by cross-validated error."""
    if d.n_instances < params.pruning_folds:
        raise ValueError(f"cannot form {params.pruning_folds} pruning folds from {d.n_instances} instances")
    full = grow_full(d, params)
    seq = cost_complexity_sequence(full)
    if len(seq) == 1:
        return full
    alphas = seq.alphas
    probes = [math.sqrt(alphas[i] * alphas[i + 1]) for i in range(len(alphas) - 1)] + [math.inf]
    X, y, w = d.values, d.labels, np.asarray(d.weights, dtype=float)
    folds = stratified_fold_ids(y, params.pruning_folds, params.seed)
    errs = np.zeros(len(probes))
    for f in range(params.pruning_folds):
        tr, te = folds != f, folds == f
        if w[tr].sum() <= 0:
            continue
        fold_seq = cost_complexity_sequence(
            _grow(X[tr], y[tr], w[tr], d.attributes, d.feature_indices, d.n_classes,
                  params.min_instances_per_leaf))
        for i, beta in enumerate(probes):
            errs[i] += _weighted_errors(fold_seq.tree_for_alpha(beta), X[te], y[te], w[te])
    rate = errs / w.sum()
    best = int(np.argmin(rate))
    limit = rate[best]
    if params.use_one_se_rule:
        limit += math.sqrt(rate[best] * (1 - rate[best]) / d.n_instances)
    chosen = max(i for i in range(len(rate)) if rate[i] <= limit + TIE_EPS)
    return seq.trees[chosen]


def fit(d: Dataset, params: CartParams = CartParams()) -> TreeModel:
    root = select_pruned_tree(d, params) if d.n_instances >= params.pruning_folds else grow_full(d, params)
    return TreeModel(root, d.n_classes, len(d.attributes), "cart", HEAVIER)


def params_dict(params: CartParams) -> dict:
    return asdict(params)

