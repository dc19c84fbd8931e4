"""Laplace-smoothed naive Bayes over nominal and MDL-discretised numeric attributes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measures import mdl_cut_points


@dataclass(eq=False)
class AttributeTable:
    attribute_index: int
    table: np.ndarray                       # (n_classes, n_bins) conditional probabilities
    cut_points: np.ndarray | None = None    # None for nominal attributes

    def bins(self, col: np.ndarray) -> np.ndarray:
        if self.cut_points is None:
            return np.where(np.isnan(col), -1, np.nan_to_num(col, nan=-1.0)).astype(int)
        b = np.searchsorted(self.cut_points, col, side="left")
        return np.where(np.isnan(col), -1, b)


@dataclass(eq=False)
class NaiveBayesModel:
    priors: np.ndarray
    tables: list[AttributeTable]

    @property
    def n_classes(self) -> int:
        return self.priors.size

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        logp = np.tile(np.log(self.priors), (X.shape[0], 1))
        for t in self.tables:
            b = t.bins(X[:, t.attribute_index])
            seen = b >= 0
            if seen.any():
                logp[seen] += np.log(t.table[:, b[seen]]).T
        logp -= logp.max(axis=1, keepdims=True)
        p = np.exp(logp)
        return p / p.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        return {"priors": self.priors.tolist(),
                "tables": [{"attribute": t.attribute_index, "table": t.table.tolist(),
                            "cut_points": None if t.cut_points is None else t.cut_points.tolist()}
                           for t in self.tables]}

    @classmethod
    def from_dict(cls, obj: dict) -> "NaiveBayesModel":
        tables = [AttributeTable(t["attribute"], np.array(t["table"], dtype=float),
                                 None if t["cut_points"] is None else np.array(t["cut_points"], dtype=float))
                  for t in obj["tables"]]
        return cls(np.array(obj["priors"], dtype=float), tables)


def fit_arrays(X, y, w, attributes, features, n_classes) -> NaiveBayesModel:
    """Fit on raw arrays; numeric attributes are discretised on these rows only."""
    cw = np.bincount(y, weights=w, minlength=n_classes)
    priors = (cw + 1.0) / (cw.sum() + n_classes)
    tables = []
    for j in features:
        a = attributes[j]
        col = X[:, j]
        if a.is_nominal:
            cuts = None
            n_bins = len(a.nominal_values)
            b = np.where(np.isnan(col), -1, np.nan_to_num(col, nan=-1.0)).astype(int)
        else:
            cuts = np.asarray(mdl_cut_points(col, y, w, n_classes), dtype=float)
            n_bins = cuts.size + 1
            b = np.where(np.isnan(col), -1, np.searchsorted(cuts, col, side="left"))
        seen = b >= 0
        counts = np.zeros((n_classes, n_bins))
        np.add.at(counts, (y[seen], b[seen]), w[seen])
        table = (counts + 1.0) / (counts.sum(axis=1, keepdims=True) + n_bins)
        tables.append(AttributeTable(j, table, cuts))
    return NaiveBayesModel(priors, tables)


def fit_naive_bayes(d) -> NaiveBayesModel:
    """Fit on the weighted instances of a `Dataset`."""
    if d.weights.sum() <= 0:
        raise ValueError("view has no weight")
    return fit_arrays(d.values, d.labels, np.asarray(d.weights, dtype=float), d.attributes,
                      d.feature_indices, d.n_classes)
