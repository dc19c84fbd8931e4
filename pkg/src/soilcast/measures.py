"""Entropy, gain, Gini and symmetric-uncertainty measures over weighted class counts.

Every measure takes real-valued (weighted) counts so fractional instance
weights from missing-value handling and boosting share one code path.
Logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

SPLIT_INFO_EPS = 1e-10
TOTALS_RTOL = 1e-6


@dataclass(frozen=True)
class ClassDistribution:
    weights_per_class: tuple[float, ...]

    @property
    def total(self) -> float:
        return math.fsum(self.weights_per_class)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.weights_per_class, dtype=dtype or float)


@dataclass(frozen=True)
class CutPointSet:
    attribute_index: int
    cut_points: tuple[float, ...] = ()

    def __post_init__(self):
        cuts = tuple(float(c) for c in self.cut_points)
        if any(b <= a for a, b in zip(cuts, cuts[1:])):
            raise ValueError("cut points must be strictly increasing")
        object.__setattr__(self, "cut_points", cuts)

    def __len__(self) -> int:
        return len(self.cut_points)

    def bin_of(self, values: np.ndarray) -> np.ndarray:
        """Bin index of each value; ``-1`` for missing."""
        values = np.asarray(values, dtype=float)
        bins = np.searchsorted(np.asarray(self.cut_points), values, side="left")
        return np.where(np.isnan(values), -1, bins)


def _counts(dist) -> np.ndarray:
    w = np.asarray(dist, dtype=float)
    if np.any(w < 0):
        raise ValueError("class weights must be nonnegative")
    return w


def entropy(dist) -> float:
    w = _counts(dist)
    total = w.sum()
    if total <= 0:
        raise ValueError("entropy of an empty distribution")
    p = w / total
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum()) + 0.0


def gini(dist) -> float:
    w = _counts(dist)
    total = w.sum()
    if total <= 0:
        raise ValueError("gini of an empty distribution")
    p = w / total
    return float(1.0 - (p * p).sum())


def _check_partition(parent, children) -> tuple[np.ndarray, list[np.ndarray]]:
    p = _counts(parent)
    ch = [_counts(c) for c in children]
    total = p.sum()
    if total <= 0:
        raise ValueError("parent distribution is empty")
    if not ch:
        raise ValueError("no children given")
    child_total = sum(c.sum() for c in ch)
    if abs(child_total - total) > TOTALS_RTOL * total:
        raise ValueError(f"children total {child_total} does not match parent total {total}")
    return p, ch


def information_gain(parent, children: Sequence) -> float:
    p, ch = _check_partition(parent, children)
    total = p.sum()
    rest = sum(c.sum() / total * entropy(c) for c in ch if c.sum() > 0)
    return entropy(p) - rest


def split_info(sizes: Sequence[float]) -> float:
    s = np.asarray(sizes, dtype=float)
    s = s[s > 0]
    if s.size == 0:
        return 0.0
    q = s / s.sum()
    q = q[q > 0]
    return float(-(q * np.log2(q)).sum()) + 0.0


def gain_ratio(parent, children: Sequence) -> float:
    gain = information_gain(parent, children)
    si = split_info([np.sum(_counts(c)) for c in children])
    if si < SPLIT_INFO_EPS:
        return 0.0
    return gain / si


def gini_decrease(parent, children: Sequence) -> float:
    p, ch = _check_partition(parent, children)
    total = p.sum()
    return gini(p) - sum(c.sum() / total * gini(c) for c in ch if c.sum() > 0)


# Row-wise variants on count matrices, used by the split searches.

def entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy along the last axis of a count array; empty rows give 0."""
    counts = np.asarray(counts, dtype=float)
    tot = counts.sum(axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        clogc = np.where(counts > 0, counts * np.log2(counts), 0.0).sum(axis=-1)
        h = np.where(tot > 0, np.log2(tot) - clogc / tot, 0.0)
    return np.maximum(h, 0.0)


def gini_rows(counts: np.ndarray) -> np.ndarray:
    counts = np.asarray(counts, dtype=float)
    tot = counts.sum(axis=1)
    safe = np.where(tot > 0, tot, 1.0)
    return np.where(tot > 0, 1.0 - ((counts / safe[:, None]) ** 2).sum(axis=1), 0.0)


def _entropy_of_codes(codes: np.ndarray, weights: np.ndarray) -> float:
    _, inv = np.unique(codes, return_inverse=True, axis=0)
    # sorted so the joint entropy does not depend on argument order
    w = np.sort(np.bincount(inv.ravel(), weights=weights))
    return entropy(w) if w.sum() > 0 else 0.0


def symmetric_uncertainty(x, y, weights=None) -> float:
    """Normalised mutual information 2*I(X;Y) / (H(X) + H(Y)) of two discrete columns."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[0] != y.shape[0]:
        raise ValueError("columns differ in length")
    w = np.ones(x.shape[0]) if weights is None else np.asarray(weights, dtype=float)
    if w.shape[0] != x.shape[0]:
        raise ValueError("weights differ in length from the columns")
    if w.sum() <= 0:
        raise ValueError("total weight must be positive")
    _, xi = np.unique(x, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    xi, yi = xi.ravel(), yi.ravel()
    hx = _entropy_of_codes(xi, w)
    hy = _entropy_of_codes(yi, w)
    if hx + hy <= 0:
        return 0.0
    hxy = _entropy_of_codes(np.column_stack([xi, yi]), w)
    su = 2.0 * (hx + hy - hxy) / (hx + hy)
    return float(min(1.0, max(0.0, su)))


def mdl_cut_points(values: np.ndarray, labels: np.ndarray, weights: np.ndarray | None = None,
                   n_classes: int | None = None) -> list[float]:
    """Recursive entropy-minimising cuts accepted by the minimum-description-length test.

    ``N`` in the acceptance threshold is the number of instances with positive
    weight; class proportions use the weights.
    """
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels, dtype=int)
    w = np.ones(values.size) if weights is None else np.asarray(weights, dtype=float)
    keep = ~np.isnan(values) & (w > 0)
    values, labels, w = values[keep], labels[keep], w[keep]
    if n_classes is None:
        n_classes = int(labels.max()) + 1 if labels.size else 1
    order = np.argsort(values, kind="stable")
    values, labels, w = values[order], labels[order], w[order]
    onehot = np.zeros((values.size, n_classes))
    onehot[np.arange(values.size), labels] = w
    cuts: list[float] = []
    _mdl_recurse(values, onehot, 0, values.size, cuts)
    return sorted(cuts)


def _boundary_positions(values: np.ndarray, onehot: np.ndarray) -> np.ndarray:
    """Positions i (cut between i-1 and i) that separate distinct values at a class boundary."""
    distinct = np.flatnonzero(values[1:] != values[:-1]) + 1
    if distinct.size == 0:
        return distinct
    # class signature of each run of equal values
    starts = np.concatenate([[0], distinct])
    run_counts = np.add.reduceat(onehot, starts, axis=0)
    present = run_counts > 0
    single = present.sum(axis=1) == 1
    cls = present.argmax(axis=1)
    same = single[:-1] & single[1:] & (cls[:-1] == cls[1:])
    return distinct[~same]


def _mdl_recurse(values, onehot, lo, hi, cuts):
    n = hi - lo
    if n < 2:
        return
    v = values[lo:hi]
    oh = onehot[lo:hi]
    cand = _boundary_positions(v, oh)
    if cand.size == 0:
        return
    total = oh.sum(axis=0)
    if total.sum() <= 0:
        return
    cum = np.cumsum(oh, axis=0)
    left = cum[cand - 1]
    right = total - left
    wl, wr = left.sum(axis=1), right.sum(axis=1)
    W = total.sum()
    ent = entropy(total)
    el, er = entropy_rows(left), entropy_rows(right)
    gains = ent - (wl * el + wr * er) / W
    best = gains.max()
    i = int(np.flatnonzero(gains >= best - 1e-12)[0])
    pos = cand[i]
    k = int((total > 0).sum())
    k1 = int((left[i] > 0).sum())
    k2 = int((right[i] > 0).sum())
    e1, e2 = el[i], er[i]
    delta = math.log2(3 ** k - 2) - (k * ent - k1 * e1 - k2 * e2)
    threshold = (math.log2(n - 1) + delta) / n
    if gains[i] <= threshold:
        return
    cuts.append(float((v[pos - 1] + v[pos]) / 2.0))
    _mdl_recurse(values, onehot, lo, lo + pos, cuts)
    _mdl_recurse(values, onehot, lo + pos, hi, cuts)


def discretize_mdl(d, attribute_index: int) -> CutPointSet:
    """MDL cut points for one numeric attribute of a `Dataset`, using its weights."""
    attr = d.attributes[attribute_index]
    if attr.is_nominal:
        raise ValueError(f"attribute {attr.name!r} is not numeric")
    cuts = mdl_cut_points(d.values[:, attribute_index], d.labels, d.weights, d.n_classes)
    return CutPointSet(attribute_index, tuple(cuts))
