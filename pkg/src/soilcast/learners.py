"""Learner designators and the select/boost pipeline composition."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from typing import Callable

from . import adaboost, c45, cart, nbtree
from .cfs import FeatureSubset, attribute_selected_train, select_features
from .dataset import Dataset
from .tree import Classifier, MajorityModel

ALGORITHMS = {"j48": "J48", "c45": "J48", "cart": "SimpleCart", "nbtree": "NBTree", "majority": "ZeroR"}
SELECT_THEN_BOOST = "select_then_boost"
BOOST_SELECTED = "boost_selected"


def base_trainer(algo: str, params: dict | None = None, seed: int = 1) -> Callable[[Dataset], Classifier]:
    """Return ``Dataset -> Classifier`` for a learner name; ``params`` override its defaults."""
    params = dict(params or {})
    algo = algo.lower()
    if algo in ("j48", "c45"):
        p = c45.C45Params(**params)
        return lambda d: c45.fit(d, p)
    if algo == "cart":
        p = cart.CartParams(**{"seed": seed, **params})
        return lambda d: cart.fit(d, p)
    if algo == "nbtree":
        p = nbtree.NBTreeParams(**{"seed": seed, **params})
        return lambda d: nbtree.fit(d, p)
    if algo == "majority":
        return MajorityModel.fit
    raise ValueError(f"unknown learner {algo!r}; expected one of {', '.join(ALGORITHMS)}")


@dataclass(frozen=True)
class Pipeline:
    """A base learner optionally wrapped in CFS selection and/or AdaBoost.M1.

    ``nesting`` orders the two wrappers: ``select_then_boost`` selects once on
    the training data and boosts the base learner on the reduced data;
    ``boost_selected`` boosts a learner that runs its own selection on every
    reweighted sample. ``selection_scope="dataset"`` makes cross-validation
    select once on the full dataset instead of per training fold.
    """

    algo: str = "j48"
    select: str | None = None
    boost_iterations: int = 0
    nesting: str = SELECT_THEN_BOOST
    resample: bool = False
    selection_scope: str = "fold"
    max_stale: int = 5
    seed: int = 1
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.algo.lower() not in ALGORITHMS:
            raise ValueError(f"unknown learner {self.algo!r}")
        if self.select not in (None, "cfs"):
            raise ValueError(f"unknown attribute selector {self.select!r}")
        if self.boost_iterations < 0:
            raise ValueError("boost_iterations must be nonnegative")
        if self.nesting not in (SELECT_THEN_BOOST, BOOST_SELECTED):
            raise ValueError(f"unknown nesting {self.nesting!r}")
        if self.selection_scope not in ("fold", "dataset"):
            raise ValueError(f"unknown selection scope {self.selection_scope!r}")

    @property
    def name(self) -> str:
        label = ALGORITHMS[self.algo.lower()]
        if self.boost_iterations:
            label = f"AdaBoostM1({label})"
        if self.select:
            label = f"CFS+{label}"
        return label

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, obj: dict) -> "Pipeline":
        return cls(**obj)

    def with_seed(self, seed: int) -> "Pipeline":
        return replace(self, seed=seed)


def fit_pipeline(p: Pipeline, d: Dataset, subset: FeatureSubset | None = None) -> Classifier:
    """Train the full pipeline on ``d``; a given ``subset`` skips the selection search."""
    base = base_trainer(p.algo, p.params, p.seed)

    def boosted(fit_base, data):
        bp = adaboost.BoostParams(p.boost_iterations, fit_base, p.resample, p.seed)
        ens = adaboost.train(data, bp)
        ens.base = p.algo
        return ens

    if not p.select:
        return boosted(base, d) if p.boost_iterations else base(d)
    if p.boost_iterations and p.nesting == BOOST_SELECTED:
        def selected(data):
            return attribute_selected_train(data, base, subset, p.max_stale)
        return boosted(selected, d)
    if subset is None:
        subset = select_features(d, p.max_stale)
    inner = (lambda data: boosted(base, data)) if p.boost_iterations else base
    return attribute_selected_train(d, inner, subset, p.max_stale)

