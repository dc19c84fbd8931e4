"""Correlation-based feature subset selection and the attribute-selected classifier."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .dataset import Dataset
from .measures import mdl_cut_points, symmetric_uncertainty
from .tree import Classifier


@dataclass(frozen=True)
class FeatureSubset:
    attribute_indices: tuple[int, ...]
    merit: float

    def __post_init__(self):
        idx = tuple(sorted(set(int(i) for i in self.attribute_indices)))
        object.__setattr__(self, "attribute_indices", idx)
        if not math.isfinite(self.merit):
            raise ValueError("merit must be finite")

    def __len__(self) -> int:
        return len(self.attribute_indices)


@dataclass
class CorrelationCache:
    """Feature-class and feature-feature symmetric uncertainties, keyed by schema index."""

    r_cf: dict[int, float] = field(default_factory=dict)
    r_ff: dict[tuple[int, int], float] = field(default_factory=dict)

    @property
    def attributes(self) -> list[int]:
        return sorted(self.r_cf)

    def ff(self, i: int, j: int) -> float:
        if i == j:
            return 1.0
        return self.r_ff[(i, j) if i < j else (j, i)]


def discretized_column(d: Dataset, j: int) -> np.ndarray:
    """Integer codes for column ``j``: MDL bins for numeric attributes, -1 for missing."""
    col = d.values[:, j]
    if d.attributes[j].is_nominal:
        return np.where(np.isnan(col), -1, np.nan_to_num(col, nan=-1.0)).astype(int)
    cuts = np.asarray(mdl_cut_points(col, d.labels, d.weights, d.n_classes))
    return np.where(np.isnan(col), -1, np.searchsorted(cuts, col, side="left"))


def build_correlations(d: Dataset) -> CorrelationCache:
    feats = d.feature_indices
    if len(feats) < 2:
        raise ValueError("need at least two attributes besides the class")
    w = np.asarray(d.weights, dtype=float)
    cols = {j: discretized_column(d, j) for j in feats}
    y = d.labels
    cache = CorrelationCache()
    for j in feats:
        cache.r_cf[j] = symmetric_uncertainty(cols[j], y, w)
    for i, j in combinations(feats, 2):
        cache.r_ff[(i, j)] = symmetric_uncertainty(cols[i], cols[j], w)
    return cache


def merit(subset, cache: CorrelationCache) -> float:
    """k * mean(r_cf) / sqrt(k + k(k-1) * mean(r_ff)); 0 for the empty set."""
    s = sorted(subset)
    k = len(s)
    if k == 0:
        return 0.0
    rcf = sum(cache.r_cf[i] for i in s) / k
    rff = 0.0
    if k > 1:
        pairs = list(combinations(s, 2))
        rff = sum(cache.ff(i, j) for i, j in pairs) / len(pairs)
    denom = math.sqrt(k + k * (k - 1) * rff)
    return k * rcf / denom


def best_first_search(cache: CorrelationCache, max_stale: int = 5,
                      visited: dict | None = None) -> FeatureSubset:
    """Forward best-first search from the empty set.

    Stops after ``max_stale`` consecutive expansions that do not improve the best
    merit. Every evaluated subset and its merit is recorded in ``visited`` when
    a dict is supplied.
    """
    attrs = cache.attributes
    seen: dict[frozenset, float] = {frozenset(): 0.0}
    best_set, best_merit = frozenset(), 0.0
    open_list = [(-0.0, (), frozenset())]
    stale = 0
    while open_list and stale < max_stale:
        _, _, node = heapq.heappop(open_list)
        improved = False
        for a in attrs:
            if a in node:
                continue
            child = node | {a}
            if child in seen:
                continue
            m = merit(child, cache)
            seen[child] = m
            heapq.heappush(open_list, (-m, tuple(sorted(child)), child))
            if m > best_merit + 1e-12:
                best_set, best_merit = child, m
                improved = True
        stale = 0 if improved else stale + 1
    if visited is not None:
        visited.update(seen)
    return FeatureSubset(tuple(best_set), best_merit)


def select_features(d: Dataset, max_stale: int = 5) -> FeatureSubset:
    return best_first_search(build_correlations(d), max_stale)


def filter_dataset(d: Dataset, subset: FeatureSubset) -> Dataset:
    for j in subset.attribute_indices:
        if not 0 <= j < len(d.attributes) or j == d.class_index:
            raise ValueError(f"invalid attribute index {j} for selection")
    return d.select_attributes(subset.attribute_indices)


def projection_columns(d: Dataset, subset: FeatureSubset) -> list[int]:
    return sorted(set(subset.attribute_indices) | {d.class_index})


@dataclass(eq=False)
class AttributeSelectedModel(Classifier):
    """A model trained on a column subset; full-width rows are projected before prediction."""

    inner: Classifier
    columns: list[int]
    subset: FeatureSubset
    n_attributes: int

    @property
    def n_classes(self) -> int:
        return self.inner.n_classes

    def project(self, X) -> np.ndarray:
        return self._check(X)[:, self.columns]

    def predict_proba(self, X) -> np.ndarray:
        return self.inner.predict_proba(self.project(X))

    def to_dict(self) -> dict:
        from .model_io import model_to_dict
        return {"type": "attribute_selected", "columns": list(self.columns),
                "subset": list(self.subset.attribute_indices), "merit": self.subset.merit,
                "n_attributes": self.n_attributes, "inner": model_to_dict(self.inner)}

    @classmethod
    def from_dict(cls, obj: dict) -> "AttributeSelectedModel":
        from .model_io import model_from_dict
        return cls(model_from_dict(obj["inner"]), list(obj["columns"]),
                   FeatureSubset(tuple(obj["subset"]), obj["merit"]), obj["n_attributes"])


def attribute_selected_train(d: Dataset, base, subset: FeatureSubset | None = None,
                             max_stale: int = 5) -> AttributeSelectedModel:
    """Select attributes on ``d`` (unless ``subset`` is given), then train ``base`` on the projection.

    ``base`` is a callable ``Dataset -> Classifier`` or a learner name.
    """
    if isinstance(base, str):
        from .learners import base_trainer
        base = base_trainer(base)
    if subset is None:
        subset = select_features(d, max_stale)
    reduced = filter_dataset(d, subset)
    return AttributeSelectedModel(base(reduced), projection_columns(d, subset), subset, len(d.attributes))
