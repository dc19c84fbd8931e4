"""C4.5-style tree induction (J48): gain-ratio splits and error-based pruning."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from statistics import NormalDist

import numpy as np

from .dataset import Dataset
from .measures import SPLIT_INFO_EPS, entropy_rows, split_info
from .tree import (
    FRACTIONAL, NOMINAL_MULTIWAY, NUMERIC_THRESHOLD, Internal, Leaf, Node, SplitTest, TreeModel,
    classify as _classify, empty_leaf, leaves,
)

TIE_EPS = 1e-12


@dataclass(frozen=True)
class C45Params:
    confidence_factor: float = 0.25
    min_instances_per_leaf: float = 2.0
    use_mdl_numeric_penalty: bool = True
    pruning: bool = True
    mean_gain_filter: bool = True

    def __post_init__(self):
        if not 0 < self.confidence_factor <= 0.5:
            raise ValueError("confidence_factor must lie in (0, 0.5]")
        if not self.min_instances_per_leaf > 0:
            raise ValueError("min_instances_per_leaf must be positive")


@dataclass
class Candidate:
    """One evaluated split test with its criterion values."""

    test: SplitTest
    gain: float
    raw_gain: float
    ratio: float


def _entropy(v: np.ndarray) -> float:
    return float(entropy_rows(v.reshape(1, -1))[0])


def _nominal_candidate(col, y, w, j, arity, n_classes, params) -> Candidate | None:
    known = ~np.isnan(col)
    W = w.sum()
    wk = w[known].sum()
    if wk <= 0:
        return None
    counts = np.zeros((arity, n_classes))
    np.add.at(counts, (col[known].astype(int), y[known]), w[known])
    sizes = counts.sum(axis=1)
    if (sizes >= params.min_instances_per_leaf).sum() < 2:
        return None
    ig = _entropy(counts.sum(axis=0)) - float((sizes * entropy_rows(counts)).sum() / wk)
    gain = wk / W * ig
    si = split_info(list(sizes) + [W - wk])
    ratio = gain / si if si >= SPLIT_INFO_EPS else 0.0
    return Candidate(SplitTest(j, NOMINAL_MULTIWAY, arity=arity), gain, gain, ratio)


def _numeric_candidates(X, y, w, cols, n_classes, params) -> list[Candidate | None]:
    """Best threshold of every numeric column in ``cols``, searched in one vectorised pass."""
    if not cols:
        return []
    Xn = X[:, cols]
    n, p = Xn.shape
    if n < 2:
        return [None] * p
    W = w.sum()
    order = np.argsort(Xn, axis=0, kind="stable")       # missing values sort last
    v = np.take_along_axis(Xn, order, axis=0)
    n_known = (~np.isnan(Xn)).sum(axis=0)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = w
    cum = np.cumsum(onehot[order], axis=0)               # (n, p, n_classes)
    last = np.maximum(n_known - 1, 0)
    total = cum[last, np.arange(p)]                      # known class weights per column
    wk = total.sum(axis=1)
    pos = np.arange(1, n)[:, None]
    with np.errstate(invalid="ignore"):
        distinct = (v[1:] != v[:-1]) & (pos < n_known[None, :])
    left = cum[:-1]
    right = total[None, :, :] - left
    wl, wr = left.sum(axis=2), right.sum(axis=2)
    ml = params.min_instances_per_leaf
    ok = distinct & (wl >= ml) & (wr >= ml)
    safe_wk = np.where(wk > 0, wk, 1.0)
    ig = entropy_rows(total)[None, :] - (wl * entropy_rows(left) + wr * entropy_rows(right)) / safe_wk
    ig = np.where(ok, ig, -np.inf)
    best_ig = ig.max(axis=0)
    n_distinct = distinct.sum(axis=0) + 1
    out: list[Candidate | None] = []
    for c, j in enumerate(cols):
        if not np.isfinite(best_ig[c]) or wk[c] <= 0:
            out.append(None)
            continue
        i = int(np.argmax(ig[:, c] >= best_ig[c] - TIE_EPS))
        raw = wk[c] / W * float(ig[i, c])
        gain = raw
        if params.use_mdl_numeric_penalty:
            gain -= math.log2(n_distinct[c] - 1) / wk[c]
        threshold = float((v[i, c] + v[i + 1, c]) / 2.0)
        si = split_info([wl[i, c], wr[i, c], W - wk[c]])
        ratio = gain / si if si >= SPLIT_INFO_EPS else 0.0
        out.append(Candidate(SplitTest(j, NUMERIC_THRESHOLD, threshold=threshold), gain, raw, ratio))
    return out


def evaluate_candidates(X, y, w, attributes, features, n_classes, params: C45Params) -> list[Candidate]:
    """Best test per attribute, in attribute order, before any gain filtering."""
    numeric = [j for j in features if not attributes[j].is_nominal]
    found = dict(zip(numeric, _numeric_candidates(X, y, w, numeric, n_classes, params)))
    out = []
    for j in features:
        a = attributes[j]
        if a.is_nominal:
            c = _nominal_candidate(X[:, j], y, w, j, len(a.nominal_values), n_classes, params)
        else:
            c = found[j]
        if c is not None:
            out.append(c)
    return out


def choose_split(cands: list[Candidate], impure: bool, params: C45Params) -> Candidate | None:
    """Pick the split among evaluated candidates.

    Candidates need positive gain; of those with at least the mean gain, the
    highest gain ratio wins, ties going to the lowest attribute index. When the
    node is impure and no valid partition carries any raw information gain
    (XOR-like structure), the lowest-index valid partition is returned with
    score 0 so growth can continue.
    """
    surv = [c for c in cands if c.gain > TIE_EPS]
    if not surv:
        if impure and cands and all(c.raw_gain <= TIE_EPS for c in cands):
            c = cands[0]
            return Candidate(c.test, 0.0, 0.0, 0.0)
        return None
    pool = surv
    if params.mean_gain_filter:
        mean = sum(c.gain for c in surv) / len(surv)
        pool = [c for c in surv if c.gain >= mean - TIE_EPS]
    best = max(c.ratio for c in pool)
    return next(c for c in pool if c.ratio >= best - TIE_EPS)


def _arrays(d: Dataset):
    return d.values, d.labels, np.asarray(d.weights, dtype=float)


def best_split(d: Dataset, params: C45Params = C45Params()) -> tuple[SplitTest, float] | None:
    """Best C4.5 test for the weighted instances of ``d`` as ``(test, gain_ratio)``."""
    X, y, w = _arrays(d)
    if w.sum() <= 0:
        raise ValueError("view has no weight")
    dist = np.bincount(y, weights=w, minlength=d.n_classes)
    cands = evaluate_candidates(X, y, w, d.attributes, d.feature_indices, d.n_classes, params)
    c = choose_split(cands, (dist > 0).sum() > 1, params)
    return None if c is None else (c.test, c.ratio)


def partition(X, y, w, test: SplitTest):
    """Rows and weights per branch; rows missing the tested value go to every branch
    with their weight scaled by the branch's share of known weight."""
    b = test.branches(X)
    known = b >= 0
    bw = np.bincount(b[known], weights=w[known], minlength=test.arity)
    frac = bw / bw.sum()
    miss = np.flatnonzero(~known)
    parts = []
    for i in range(test.arity):
        rows = np.flatnonzero(b == i)
        wts = w[rows]
        if miss.size and frac[i] > 0:
            rows = np.concatenate([rows, miss])
            wts = np.concatenate([wts, w[miss] * frac[i]])
        keep = wts > 0
        parts.append((rows[keep], wts[keep]))
    return parts, bw


def _grow(X, y, w, attributes, features, n_classes, params: C45Params) -> Node:
    dist = np.bincount(y, weights=w, minlength=n_classes)
    total = dist.sum()
    impure = (dist > 0).sum() > 1
    if total < 2 * params.min_instances_per_leaf or not impure:
        return Leaf(dist)
    cands = evaluate_candidates(X, y, w, attributes, features, n_classes, params)
    chosen = choose_split(cands, impure, params)
    if chosen is None:
        return Leaf(dist)
    parts, bw = partition(X, y, w, chosen.test)
    children = []
    for rows, wts in parts:
        if wts.sum() > 0:
            children.append(_grow(X[rows], y[rows], wts, attributes, features, n_classes, params))
        else:
            children.append(empty_leaf(n_classes, dist))
    return Internal(chosen.test, children, dist, bw)


def induce(d: Dataset, params: C45Params = C45Params()) -> Node:
    if d.n_instances == 0 or d.weights.sum() <= 0:
        raise ValueError("cannot induce a tree from an empty dataset")
    X, y, w = _arrays(d)
    root = _grow(X, y, w, d.attributes, d.feature_indices, d.n_classes, params)
    if params.pruning:
        root = prune_ebp(root, params)
    return root


def pessimistic_error(errors: float, total: float, cf: float) -> float:
    """Upper confidence limit on a leaf's error rate (normal approximation)."""
    if not 0 < cf <= 0.5:
        raise ValueError("confidence factor must lie in (0, 0.5]")
    if total <= 0 or errors < 0 or errors > total * (1 + 1e-12):
        raise ValueError("need 0 <= errors <= total and total > 0")
    z = NormalDist().inv_cdf(1.0 - cf)
    f = min(errors / total, 1.0)
    n = total
    num = f + z * z / (2 * n) + z * math.sqrt(max(f / n - f * f / n + z * z / (4 * n * n), 0.0))
    return min(1.0, max(0.0, num / (1 + z * z / n)))


def estimated_errors(node: Node, cf: float) -> float:
    """Pessimistic error count summed over the leaves of ``node``."""
    total = 0.0
    for leaf in leaves(node):
        n = leaf.total
        if n > 0:
            total += n * pessimistic_error(n - leaf.dist.max(), n, cf)
    return total


def prune_ebp(root: Node, params: C45Params = C45Params()) -> Node:
    """Bottom-up subtree replacement by pessimistic error estimates."""
    cf = params.confidence_factor

    def walk(node: Node) -> tuple[Node, float]:
        if isinstance(node, Leaf):
            n = node.total
            return node, (n * pessimistic_error(n - node.dist.max(), n, cf) if n > 0 else 0.0)
        pairs = [walk(c) for c in node.children]
        subtree = sum(e for _, e in pairs)
        n = node.total
        as_leaf = n * pessimistic_error(n - node.dist.max(), n, cf)
        if as_leaf <= subtree + 1e-9:
            return Leaf(node.dist), as_leaf
        return Internal(node.test, [c for c, _ in pairs], node.dist, node.branch_weights), subtree

    return walk(root)[0]


def classify(root: Node, row) -> np.ndarray:
    return _classify(root, row, FRACTIONAL)


def fit(d: Dataset, params: C45Params = C45Params()) -> TreeModel:
    return TreeModel(induce(d, params), d.n_classes, len(d.attributes), "c45", FRACTIONAL)


def params_dict(params: C45Params) -> dict:
    return asdict(params)
