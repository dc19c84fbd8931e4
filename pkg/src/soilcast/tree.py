"""Tree nodes shared by the C4.5, CART and NBTree inducers, and tree-walking classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

NOMINAL_MULTIWAY = "nominal"
NUMERIC_THRESHOLD = "numeric"
NOMINAL_BINARY = "nominal_binary"

FRACTIONAL = "fractional"
HEAVIER = "heavier"


@dataclass(frozen=True)
class SplitTest:
    """Test on one attribute.

    ``numeric``: branch 0 for ``x <= threshold``, branch 1 otherwise.
    ``nominal``: one branch per declared value.
    ``nominal_binary``: branch 0 for ``x == value``, branch 1 otherwise.
    """

    attribute_index: int
    kind: str
    threshold: float | None = None
    value: int | None = None
    arity: int = 2

    def branches(self, X: np.ndarray) -> np.ndarray:
        """Branch index for every row of ``X``; -1 where the tested cell is missing."""
        col = X[:, self.attribute_index]
        missing = np.isnan(col)
        if self.kind == NUMERIC_THRESHOLD:
            b = np.where(col <= self.threshold, 0, 1)
        elif self.kind == NOMINAL_BINARY:
            b = np.where(col == self.value, 0, 1)
        else:
            b = np.where(missing, -1, np.nan_to_num(col, nan=-1.0)).astype(int)
            if np.any(b >= self.arity):
                raise ValueError(f"nominal code out of range for attribute {self.attribute_index}")
        return np.where(missing, -1, b)

    def to_dict(self) -> dict:
        out = {"attribute": self.attribute_index, "kind": self.kind, "arity": self.arity}
        if self.threshold is not None:
            out["threshold"] = self.threshold
        if self.value is not None:
            out["value"] = self.value
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "SplitTest":
        return cls(obj["attribute"], obj["kind"], obj.get("threshold"), obj.get("value"), obj["arity"])


@dataclass(eq=False)
class Leaf:
    """Terminal node.

    ``dist`` holds the training class weights reaching the leaf. ``posterior``
    is ``dist`` normalised, or the parent's posterior for a branch that saw no
    training weight. ``model`` is a naive-Bayes model for NBTree leaves.
    """

    dist: np.ndarray
    posterior: np.ndarray = None
    model: object = None

    def __post_init__(self):
        self.dist = np.asarray(self.dist, dtype=float)
        if self.posterior is None:
            total = self.dist.sum()
            if total <= 0:
                raise ValueError("leaf without training weight needs an explicit posterior")
            self.posterior = self.dist / total
        self.posterior = np.asarray(self.posterior, dtype=float)

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.posterior))

    @property
    def total(self) -> float:
        return float(self.dist.sum())

    def batch(self, X: np.ndarray) -> np.ndarray:
        if self.model is not None:
            return self.model.predict_proba(X)
        return np.tile(self.posterior, (X.shape[0], 1))


@dataclass(eq=False)
class Internal:
    test: SplitTest
    children: list
    dist: np.ndarray
    branch_weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.dist = np.asarray(self.dist, dtype=float)
        if len(self.children) != self.test.arity:
            raise ValueError("child count does not match test arity")
        if self.branch_weights is None:
            self.branch_weights = np.array([c.dist.sum() for c in self.children])
        self.branch_weights = np.asarray(self.branch_weights, dtype=float)

    @property
    def predicted(self) -> int:
        return int(np.argmax(self.dist))

    @property
    def total(self) -> float:
        return float(self.dist.sum())


Node = Leaf | Internal


def empty_leaf(n_classes: int, parent_dist: np.ndarray) -> Leaf:
    parent_dist = np.asarray(parent_dist, dtype=float)
    return Leaf(np.zeros(n_classes), parent_dist / parent_dist.sum())


def batch_posterior(node: Node, X: np.ndarray, missing: str = FRACTIONAL) -> np.ndarray:
    """Class posteriors for every row of ``X``.

    A row missing the tested value either descends every branch, mixing the
    child posteriors by training branch weight (``fractional``), or follows the
    branch with the most training weight (``heavier``).
    """
    if isinstance(node, Leaf):
        return node.batch(X)
    b = node.test.branches(X)
    n_classes = node.dist.size
    out = np.zeros((X.shape[0], n_classes))
    miss = b == -1
    heavy = int(np.argmax(node.branch_weights))
    for i, child in enumerate(node.children):
        m = b == i
        if missing == HEAVIER and i == heavy:
            m = m | miss
        if m.any():
            out[m] = batch_posterior(child, X[m], missing)
    if missing == FRACTIONAL and miss.any():
        Xm = X[miss]
        frac = node.branch_weights / node.branch_weights.sum()
        acc = np.zeros((Xm.shape[0], n_classes))
        for f, child in zip(frac, node.children):
            if f > 0:
                acc += f * batch_posterior(child, Xm, missing)
        out[miss] = acc / acc.sum(axis=1, keepdims=True)
    return out


def classify(root: Node, row, missing: str = FRACTIONAL) -> np.ndarray:
    return batch_posterior(root, np.asarray(row, dtype=float).reshape(1, -1), missing)[0]


def iter_nodes(node: Node) -> Iterator[Node]:
    yield node
    if isinstance(node, Internal):
        for c in node.children:
            yield from iter_nodes(c)


def leaves(node: Node) -> list[Leaf]:
    return [n for n in iter_nodes(node) if isinstance(n, Leaf)]


def count_leaves(node: Node) -> int:
    return len(leaves(node))


def count_nodes(node: Node) -> int:
    return sum(1 for _ in iter_nodes(node))


def depth(node: Node) -> int:
    if isinstance(node, Leaf):
        return 0
    return 1 + max(depth(c) for c in node.children)


def node_errors(node: Node) -> float:
    """Training weight not in the node's majority class."""
    return float(node.dist.sum() - node.dist.max()) if node.dist.size else 0.0


def collapse(node: Node) -> Leaf:
    return Leaf(node.dist) if node.dist.sum() > 0 else node


def is_pruned_subtree(small: Node, big: Node) -> bool:
    """True when ``small`` is ``big`` with some internal nodes replaced by leaves."""
    if isinstance(small, Leaf):
        return np.allclose(small.dist, big.dist)
    if not isinstance(big, Internal) or small.test != big.test:
        return False
    return all(is_pruned_subtree(s, b) for s, b in zip(small.children, big.children))


def node_to_dict(node: Node) -> dict:
    if isinstance(node, Leaf):
        out = {"leaf": True, "dist": node.dist.tolist(), "posterior": node.posterior.tolist()}
        if node.model is not None:
            out["naive_bayes"] = node.model.to_dict()
        return out
    return {"leaf": False, "test": node.test.to_dict(), "dist": node.dist.tolist(),
            "branch_weights": node.branch_weights.tolist(),
            "children": [node_to_dict(c) for c in node.children]}


def node_from_dict(obj: dict) -> Node:
    if obj["leaf"]:
        model = None
        if "naive_bayes" in obj:
            from .naive_bayes import NaiveBayesModel
            model = NaiveBayesModel.from_dict(obj["naive_bayes"])
        return Leaf(np.array(obj["dist"]), np.array(obj["posterior"]), model)
    return Internal(SplitTest.from_dict(obj["test"]), [node_from_dict(c) for c in obj["children"]],
                    np.array(obj["dist"]), np.array(obj["branch_weights"]))


class Classifier:
    """Common prediction surface: rows are full-schema cell vectors."""

    n_classes: int
    n_attributes: int

    def _check(self, X) -> np.ndarray:
        X = np.asarray(getattr(X, "values", X), dtype=float)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.shape[1] != self.n_attributes:
            raise ValueError(f"expected {self.n_attributes} cells per instance, got {X.shape[1]}")
        return X

    def predict_proba(self, X) -> np.ndarray:
        raise NotImplementedError

    def distribution(self, row) -> np.ndarray:
        return self.predict_proba(np.asarray(row, dtype=float).reshape(1, -1))[0]

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


@dataclass(eq=False)
class TreeModel(Classifier):
    root: Node
    n_classes: int
    n_attributes: int
    kind: str
    missing: str = FRACTIONAL

    def predict_proba(self, X) -> np.ndarray:
        return batch_posterior(self.root, self._check(X), self.missing)

    @property
    def n_leaves(self) -> int:
        return count_leaves(self.root)

    def to_dict(self) -> dict:
        return {"type": "tree", "kind": self.kind, "missing": self.missing, "n_classes": self.n_classes,
                "n_attributes": self.n_attributes, "root": node_to_dict(self.root)}

    @classmethod
    def from_dict(cls, obj: dict) -> "TreeModel":
        return cls(node_from_dict(obj["root"]), obj["n_classes"], obj["n_attributes"], obj["kind"],
                   obj["missing"])


@dataclass(eq=False)
class MajorityModel(Classifier):
    """Predicts the training class distribution for every instance."""

    dist: np.ndarray
    n_attributes: int

    @property
    def n_classes(self) -> int:
        return self.dist.size

    @classmethod
    def fit(cls, d) -> "MajorityModel":
        w = d.class_weights()
        return cls(w / w.sum(), len(d.attributes))

    def predict_proba(self, X) -> np.ndarray:
        return np.tile(self.dist, (self._check(X).shape[0], 1))

    def to_dict(self) -> dict:
        return {"type": "majority", "dist": self.dist.tolist(), "n_attributes": self.n_attributes}

    @classmethod
    def from_dict(cls, obj: dict) -> "MajorityModel":
        return cls(np.array(obj["dist"]), obj["n_attributes"])
