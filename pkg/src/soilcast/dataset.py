"""Dataset model, CSV ingestion, stratified folds and the synthetic soil generator.

Cells are held in one float matrix: numeric attributes store their value,
nominal attributes store the index of the value in ``AttributeSpec.nominal_values``
and missing cells are ``NaN``.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)

NUMERIC = "numeric"
NOMINAL = "nominal"

FERTILITY_LEVELS = ("very low", "low", "moderate", "moderately high", "high", "very high")
SOIL_ATTRIBUTES = ("Ph", "EC", "OC", "P", "K", "Fe", "Zn", "Mn", "Cu")


class DataError(ValueError):
    """Raised for malformed or schema-violating input data."""


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str = NUMERIC
    nominal_values: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (NUMERIC, NOMINAL):
            raise ValueError(f"unknown attribute kind {self.kind!r}")
        object.__setattr__(self, "nominal_values", tuple(self.nominal_values))
        if self.kind == NOMINAL:
            if not self.nominal_values:
                raise ValueError(f"nominal attribute {self.name!r} needs at least one value")
            if len(set(self.nominal_values)) != len(self.nominal_values):
                raise ValueError(f"duplicate nominal values in {self.name!r}")
        elif self.nominal_values:
            raise ValueError(f"numeric attribute {self.name!r} cannot carry nominal values")

    @property
    def is_nominal(self) -> bool:
        return self.kind == NOMINAL

    def encode(self, token: str) -> float:
        if self.kind == NUMERIC:
            return float(token)
        try:
            return float(self.nominal_values.index(token))
        except ValueError:
            raise DataError(f"value {token!r} is not a declared value of {self.name!r}") from None

    def decode(self, value: float) -> str | float | None:
        if math.isnan(value):
            return None
        if self.kind == NUMERIC:
            return float(value)
        return self.nominal_values[int(value)]

    def to_dict(self) -> dict:
        return {"name": self.name, "kind": self.kind, "nominal_values": list(self.nominal_values)}

    @classmethod
    def from_dict(cls, obj: dict) -> "AttributeSpec":
        return cls(obj["name"], obj["kind"], tuple(obj.get("nominal_values", ())))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of weighted instances with a nominal class column.

    Parameters
    ----------
    attributes : sequence of AttributeSpec
        Full schema, class column included.
    class_index : int
        Position of the class attribute in ``attributes``.
    values : ndarray of shape (n_instances, n_attributes)
        Encoded cells, ``NaN`` for missing.
    weights : ndarray of shape (n_instances,), optional
        Instance weights, defaulting to 1.
    """

    attributes: tuple[AttributeSpec, ...]
    class_index: int
    values: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        attrs = tuple(self.attributes)
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2:
            values = values.reshape(-1, len(attrs))
        n = values.shape[0]
        weights = np.ones(n) if self.weights is None else np.array(self.weights, dtype=float, copy=True)
        names = [a.name for a in attrs]
        if len(set(names)) != len(names):
            raise ValueError("attribute names must be unique")
        if not 0 <= self.class_index < len(attrs):
            raise ValueError("class_index out of range")
        if not attrs[self.class_index].is_nominal:
            raise ValueError("class attribute must be nominal")
        if values.shape[1] != len(attrs):
            raise ValueError(f"expected {len(attrs)} cells per instance, got {values.shape[1]}")
        if weights.shape != (n,) or np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise ValueError("weights must be finite, nonnegative and one per instance")
        for j, a in enumerate(attrs):
            if a.is_nominal:
                col = values[:, j]
                known = col[~np.isnan(col)]
                if known.size and (np.any(known < 0) or np.any(known >= len(a.nominal_values))
                                   or np.any(known != np.floor(known))):
                    raise ValueError(f"invalid nominal code in column {a.name!r}")
        if n and np.any(np.isnan(values[:, self.class_index])):
            raise ValueError("class value missing")
        values.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_instances(self) -> int:
        return self.values.shape[0]

    @property
    def class_attribute(self) -> AttributeSpec:
        return self.attributes[self.class_index]

    @property
    def n_classes(self) -> int:
        return len(self.class_attribute.nominal_values)

    @property
    def labels(self) -> np.ndarray:
        return self.values[:, self.class_index].astype(int)

    @property
    def feature_indices(self) -> list[int]:
        return [j for j in range(len(self.attributes)) if j != self.class_index]

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def class_weights(self) -> np.ndarray:
        return np.bincount(self.labels, weights=self.weights, minlength=self.n_classes)

    def subset(self, rows: Sequence[int] | np.ndarray) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.attributes, self.class_index, self.values[rows], self.weights[rows])

    def with_weights(self, weights: np.ndarray) -> "Dataset":
        return Dataset(self.attributes, self.class_index, self.values, weights)

    def select_attributes(self, indices: Iterable[int]) -> "Dataset":
        """Keep the given attribute columns plus the class column, in schema order."""
        keep = sorted(set(indices) | {self.class_index})
        for j in keep:
            if not 0 <= j < len(self.attributes):
                raise ValueError(f"attribute index {j} out of range")
        return Dataset(tuple(self.attributes[j] for j in keep), keep.index(self.class_index),
                       self.values[:, keep], self.weights)

    def decoded_rows(self) -> list[list]:
        return [[a.decode(v) for a, v in zip(self.attributes, row)] for row in self.values]

    def schema_dict(self) -> dict:
        return {"attributes": [a.to_dict() for a in self.attributes], "class_index": self.class_index}


@dataclass(frozen=True)
class FoldAssignment:
    k: int
    fold_of: tuple[int, ...]

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_of) == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(np.asarray(self.fold_of) != fold)

    def sizes(self) -> list[int]:
        return np.bincount(np.asarray(self.fold_of, dtype=int), minlength=self.k).tolist()


@dataclass
class LoadSummary:
    rows_read: int = 0
    rows_rejected: int = 0
    rejected_lines: list[int] = field(default_factory=list)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & 0xFFFFFFFFFFFFFFFF)


def _is_number(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def read_csv(path, class_column: str | int = -1, header: bool = True, missing_token: str = "?",
             nominal_columns: Iterable[str] = ()) -> tuple[Dataset, LoadSummary]:
    """Parse a CSV file into a `Dataset`, also returning row-rejection counts.

    A column is numeric when its first non-missing token parses as a float,
    unless named in ``nominal_columns``. The class column is always nominal.
    Nominal values are numbered in order of first appearance.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [(i + 1, r) for i, r in enumerate(csv.reader(fh)) if r and any(c.strip() for c in r)]
    if header:
        if not rows:
            raise DataError(f"{path}: empty file")
        names = [c.strip() for c in rows[0][1]]
        rows = rows[1:]
    else:
        width = len(rows[0][1]) if rows else 0
        names = [f"a{j}" for j in range(width)]
    width = len(names)
    for lineno, r in rows:
        if len(r) != width:
            raise DataError(f"{path}:{lineno}: expected {width} fields, found {len(r)}")

    if isinstance(class_column, str):
        if class_column not in names:
            raise DataError(f"{path}: class column {class_column!r} not found")
        cidx = names.index(class_column)
    else:
        cidx = class_column if class_column >= 0 else width + class_column
        if not 0 <= cidx < width:
            raise DataError(f"{path}: class column index {class_column} out of range")

    summary = LoadSummary(rows_read=len(rows))
    kept = []
    for lineno, r in rows:
        cells = [c.strip() for c in r]
        if cells[cidx] == missing_token or cells[cidx] == "":
            summary.rows_rejected += 1
            summary.rejected_lines.append(lineno)
            continue
        kept.append((lineno, cells))

    forced = set(nominal_columns)
    kinds = []
    for j, name in enumerate(names):
        if j == cidx or name in forced:
            kinds.append(NOMINAL)
            continue
        first = next((c[j] for _, c in kept if c[j] != missing_token), None)
        kinds.append(NUMERIC if first is None or _is_number(first) else NOMINAL)

    seen: list[dict[str, int]] = [{} for _ in names]
    values = np.full((len(kept), width), np.nan)
    for i, (lineno, cells) in enumerate(kept):
        for j, tok in enumerate(cells):
            if tok == missing_token:
                continue
            if kinds[j] == NUMERIC:
                try:
                    values[i, j] = float(tok)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: non-numeric value {tok!r} in numeric column "
                                    f"{names[j]!r}") from None
            else:
                values[i, j] = seen[j].setdefault(tok, len(seen[j]))

    attrs = []
    for j, name in enumerate(names):
        if kinds[j] == NOMINAL:
            levels = tuple(seen[j]) or ("?",)
            attrs.append(AttributeSpec(name, NOMINAL, levels))
        else:
            attrs.append(AttributeSpec(name, NUMERIC))
    return Dataset(tuple(attrs), cidx, values), summary


def load_csv(path, class_column: str | int = -1, header: bool = True, missing_token: str = "?",
             nominal_columns: Iterable[str] = ()) -> Dataset:
    d, summary = read_csv(path, class_column, header, missing_token, nominal_columns)
    if summary.rows_rejected:
        log.warning("%s: rejected %d row(s) with a missing class value", path, summary.rows_rejected)
    return d


def _format_cell(attr: AttributeSpec, value: float, missing_token: str) -> str:
    if math.isnan(value):
        return missing_token
    if attr.is_nominal:
        return attr.nominal_values[int(value)]
    return repr(float(value))


def write_csv(d: Dataset, path, missing_token: str = "?") -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(d.names)
        for row in d.values:
            w.writerow([_format_cell(a, v, missing_token) for a, v in zip(d.attributes, row)])


def stratified_fold_ids(labels: np.ndarray, k: int, seed: int) -> np.ndarray:
    """Shuffle each class's indices, concatenate classes in index order, deal round-robin."""
    labels = np.asarray(labels, dtype=int)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > labels.size:
        raise ValueError(f"cannot make {k} folds from {labels.size} instances")
    rng = make_rng(seed)
    order = []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        order.append(idx[rng.permutation(idx.size)])
    order = np.concatenate(order)
    fold_of = np.empty(labels.size, dtype=int)
    fold_of[order] = np.arange(labels.size) % k
    return fold_of


def stratified_k_folds(d: Dataset, k: int, seed: int) -> FoldAssignment:
    return FoldAssignment(k, tuple(int(f) for f in stratified_fold_ids(d.labels, k, seed)))


# Synthetic soil generator. Values are plausible soil chemistry, not measurements.
# name: (centre, spread, class_slope, decimals). Class means sit at
# centre + class_slope * separation * spread * (level - 2.5); slopes are in spread units.
SOIL_PROFILE = {
    "Ph": (7.2, 0.7, 0.0, 2),    # pH, roughly 4-9
    "EC": (0.9, 0.45, 0.0, 3),   # dS/m, roughly 0-4
    "OC": (0.75, 0.08, 1.0, 3),  # %
    "P": (25.0, 2.5, 1.0, 2),    # ppm
    "K": (300.0, 25.0, 1.0, 1),  # ppm
    "Fe": (6.0, 2.0, 0.25, 2),   # ppm
    "Zn": (0.9, 0.35, 0.25, 3),  # ppm
    "Mn": (9.0, 3.0, 0.0, 2),    # ppm
    "Cu": (1.8, 0.6, 0.0, 3),    # ppm
}
# Shared within-class correlations (pairs of attribute names).
SOIL_CORRELATIONS = {("Fe", "Mn"): 0.4, ("Zn", "Cu"): 0.3, ("Ph", "EC"): 0.2}


def soil_class_means(class_separation: float) -> np.ndarray:
    """Per-class mean vectors (6 x 9) of the synthetic generator."""
    levels = np.arange(len(FERTILITY_LEVELS)) - (len(FERTILITY_LEVELS) - 1) / 2
    centre = np.array([p[0] for p in SOIL_PROFILE.values()])
    spread = np.array([p[1] for p in SOIL_PROFILE.values()])
    slope = np.array([p[2] for p in SOIL_PROFILE.values()])
    return centre + np.outer(levels, slope * spread * class_separation)


def soil_covariance() -> np.ndarray:
    names = list(SOIL_PROFILE)
    spread = np.array([p[1] for p in SOIL_PROFILE.values()])
    corr = np.eye(len(names))
    for (a, b), r in SOIL_CORRELATIONS.items():
        i, j = names.index(a), names.index(b)
        corr[i, j] = corr[j, i] = r
    return corr * np.outer(spread, spread)


def synthesize_soil_dataset(n: int, seed: int, class_separation: float = 2.0) -> Dataset:
    """Draw a balanced six-class soil dataset in the nine-nutrient schema."""
    if n < 60:
        raise ValueError("n must be at least 60 (10 instances per class)")
    if not class_separation > 0 or not math.isfinite(class_separation):
        raise ValueError("class_separation must be a positive finite number")
    rng = make_rng(seed)
    n_cls = len(FERTILITY_LEVELS)
    counts = [n // n_cls + (1 if c < n % n_cls else 0) for c in range(n_cls)]
    means = soil_class_means(class_separation)
    cov = soil_covariance()
    chol = np.linalg.cholesky(cov)
    blocks, labels = [], []
    for c, m in enumerate(counts):
        z = rng.standard_normal((m, len(SOIL_PROFILE)))
        blocks.append(means[c] + z @ chol.T)
        labels.append(np.full(m, c))
    x = np.vstack(blocks)
    y = np.concatenate(labels)
    perm = rng.permutation(n)
    x, y = x[perm], y[perm]
    x = np.maximum(x, 0.0)
    for j, (_, _, _, decimals) in enumerate(SOIL_PROFILE.values()):
        x[:, j] = np.round(x[:, j], decimals)
    attrs = tuple(AttributeSpec(a) for a in SOIL_ATTRIBUTES) + (
        AttributeSpec("label", NOMINAL, FERTILITY_LEVELS),)
    return Dataset(attrs, len(SOIL_ATTRIBUTES), np.column_stack([x, y]))


def add_noise_attributes(d: Dataset, count: int, seed: int) -> Dataset:
    """Insert ``count`` standard-normal columns, carrying no class information, before the class column."""
    rng = make_rng(seed)
    noise = np.round(rng.standard_normal((d.n_instances, count)), 4)
    taken = set(d.names)
    names = []
    i = 0
    while len(names) < count:
        name = f"noise{i}"
        if name not in taken:
            names.append(name)
        i += 1
    # noise goes just before the class column so a trailing class column stays last
    c = d.class_index
    attrs = d.attributes[:c] + tuple(AttributeSpec(nm) for nm in names) + d.attributes[c:]
    values = np.column_stack([d.values[:, :c], noise, d.values[:, c:]])
    return Dataset(attrs, c + count, values, d.weights)
