"""AdaBoost.M1 over weight-accepting base learners."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .dataset import Dataset, make_rng
from .tree import Classifier

BETA_MIN = 1e-10
# vote of a lone first member whose error was >= 0.5; it only matters for serialisation
BETA_MAX = 1.0 - 1e-10


@dataclass(frozen=True)
class BoostParams:
    iterations: int = 10
    base: str | Callable = "j48"
    resample: bool = False
    seed: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")


@dataclass(eq=False)
class EnsembleMember:
    model: Classifier
    beta: float

    @property
    def vote_weight(self) -> float:
        return math.log(1.0 / self.beta)


@dataclass(eq=False)
class BoostedEnsemble(Classifier):
    members: list[EnsembleMember]
    n_classes: int
    n_attributes: int
    base: str = "j48"
    requested: int = 10
    errors: list[float] = field(default_factory=list)

    @property
    def achieved(self) -> int:
        return len(self.members)

    def predict_proba(self, X) -> np.ndarray:
        if not self.members:
            raise RuntimeError("ensemble has no members")
        X = self._check(X)
        scores = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for m in self.members:
            scores[rows, m.model.predict(X)] += m.vote_weight
        return scores / scores.sum(axis=1, keepdims=True)

    def to_dict(self) -> dict:
        from .model_io import model_to_dict
        return {"type": "boosted", "base": self.base, "requested": self.requested,
                "n_classes": self.n_classes, "n_attributes": self.n_attributes, "errors": list(self.errors),
                "members": [{"beta": m.beta, "vote_weight": m.vote_weight, "model": model_to_dict(m.model)}
                            for m in self.members]}

    @classmethod
    def from_dict(cls, obj: dict) -> "BoostedEnsemble":
        from .model_io import model_from_dict
        members = [EnsembleMember(model_from_dict(m["model"]), m["beta"]) for m in obj["members"]]
        return cls(members, obj["n_classes"], obj["n_attributes"], obj["base"], obj["requested"],
                   list(obj.get("errors", [])))


def _check_normalized(d: Dataset) -> np.ndarray:
    w = np.asarray(d.weights, dtype=float)
    if abs(w.sum() - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {w.sum()!r}")
    return w


def misclassified(model: Classifier, d: Dataset) -> np.ndarray:
    return model.predict(d.values) != d.labels


def weighted_error(model: Classifier, d: Dataset) -> float:
    w = _check_normalized(d)
    return float(w[misclassified(model, d)].sum())


def _reweighted(w: np.ndarray, wrong: np.ndarray, eps: float) -> np.ndarray:
    beta = eps / (1.0 - eps)
    new = np.where(wrong, w, w * beta)
    return new / new.sum()


def reweight(d: Dataset, model: Classifier) -> Dataset | None:
    """Shrink correctly classified weights by beta = eps / (1 - eps) and renormalise.

    Returns ``None`` (the halt signal) when the weighted error is 0 or at least 0.5.
    """
    w = _check_normalized(d)
    wrong = misclassified(model, d)
    eps = float(w[wrong].sum())
    if not 0.0 < eps < 0.5:
        return None
    return d.with_weights(_reweighted(w, wrong, eps))


def _resolve(base) -> tuple[Callable[[Dataset], Classifier], str]:
    if callable(base):
        return base, getattr(base, "__name__", "custom")
    from .learners import base_trainer
    return base_trainer(base), base


def train(d: Dataset, params: BoostParams = BoostParams()) -> BoostedEnsemble:
    if d.n_instances == 0:
        raise ValueError("cannot boost on an empty dataset")
    fit_base, base_name = _resolve(params.base)
    n = d.n_instances
    w = np.full(n, 1.0 / n)
    rng = make_rng(params.seed)
    ens = BoostedEnsemble([], d.n_classes, len(d.attributes), base_name, params.iterations)
    for t in range(params.iterations):
        if params.resample:
            rows = rng.choice(n, size=n, replace=True, p=w)
            model = fit_base(d.subset(rows).with_weights(np.ones(n)))
        else:
            # base learners see weights rescaled to sum n so minimum-leaf sizes keep their meaning
            model = fit_base(d.with_weights(w * n))
        wrong = misclassified(model, d)
        eps = float(w[wrong].sum())
        if eps <= 0.0 or eps >= 0.5:
            if t == 0:
                ens.members.append(EnsembleMember(model, BETA_MIN if eps <= 0.0 else BETA_MAX))
                ens.errors.append(eps)
            break
        ens.members.append(EnsembleMember(model, eps / (1.0 - eps)))
        ens.errors.append(eps)
        w = _reweighted(w, wrong, eps)
    return ens


def training_error_bound(errors) -> float:
    """Product over rounds of 2 * sqrt(eps * (1 - eps))."""
    return float(np.prod([2.0 * math.sqrt(e * (1.0 - e)) for e in errors])) if errors else 1.0


def predict(e: BoostedEnsemble, inst) -> np.ndarray:
    return e.distribution(inst)
