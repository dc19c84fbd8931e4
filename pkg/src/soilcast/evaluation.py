"""Stratified cross-validation, confusion matrices and comparison tables."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .cfs import select_features
from .dataset import Dataset, stratified_k_folds
from .learners import Pipeline, fit_pipeline

REPORT_COLUMNS = ("classifier", "correctly_classified", "incorrectly_classified", "accuracy_percent")


def accuracy_from_counts(correct: int, total: int) -> float:
    if total <= 0:
        raise ValueError("total must be positive")
    if not 0 <= correct <= total:
        raise ValueError("need 0 <= correct <= total")
    return 100.0 * correct / total


@dataclass
class EvaluationReport:
    classifier: str
    correctly_classified: int
    incorrectly_classified: int
    accuracy_percent: float
    confusion: np.ndarray
    class_names: tuple[str, ...]
    fold_accuracies: list[float] = field(default_factory=list)
    seed: int = 1
    params: dict = field(default_factory=dict)

    @property
    def total(self) -> int:
        return self.correctly_classified + self.incorrectly_classified

    @property
    def error_percent(self) -> float:
        return 100.0 - self.accuracy_percent

    def row(self, decimals: int = 4) -> dict:
        return {"classifier": self.classifier, "correctly_classified": self.correctly_classified,
                "incorrectly_classified": self.incorrectly_classified,
                "accuracy_percent": round(self.accuracy_percent, decimals)}


def cross_validate(d: Dataset, pipeline: Pipeline, k: int = 10, seed: int = 1) -> EvaluationReport:
    """k-fold stratified CV retraining the whole pipeline on every training split."""
    if k < 2:
        raise ValueError("k must be at least 2")
    folds = stratified_k_folds(d, k, seed)
    fixed = None
    if pipeline.select and pipeline.selection_scope == "dataset":
        fixed = select_features(d, pipeline.max_stale)
    y = d.labels
    n_cls = d.n_classes
    confusion = np.zeros((n_cls, n_cls), dtype=int)
    fold_acc = []
    for f in range(k):
        tr, te = folds.train_indices(f), folds.test_indices(f)
        model = fit_pipeline(pipeline, d.subset(tr), fixed)
        pred = model.predict(d.values[te])
        np.add.at(confusion, (y[te], pred), 1)
        fold_acc.append(float(np.mean(pred == y[te])) * 100.0 if te.size else 0.0)
    correct = int(np.trace(confusion))
    total = int(confusion.sum())
    return EvaluationReport(pipeline.name, correct, total - correct, accuracy_from_counts(correct, total),
                            confusion, d.class_attribute.nominal_values, fold_acc, seed,
                            pipeline.to_dict())


def compare(d: Dataset, pipelines: list[Pipeline], k: int = 10, seed: int = 1) -> list[EvaluationReport]:
    """Evaluate every pipeline on the same folds; rows sorted by accuracy, then name."""
    if len(pipelines) < 2:
        raise ValueError("compare needs at least two pipelines")
    reports = [cross_validate(d, p, k, seed) for p in pipelines]
    return sorted(reports, key=lambda r: (-r.accuracy_percent, r.classifier))


def render_comparison(reports: list[EvaluationReport], decimals: int = 2) -> str:
    """Classifiers as columns; correct, incorrect and accuracy as rows."""
    labels = ["Classifier", "Correctly Classified Instances", "Incorrectly Classified Instances",
              "Accuracy (%)"]
    cols = [[r.classifier, str(r.correctly_classified), str(r.incorrectly_classified),
             f"{r.accuracy_percent:.{decimals}f}"] for r in reports]
    lw = max(len(s) for s in labels)
    widths = [max(len(c) for c in col) for col in cols]
    lines = []
    for i, label in enumerate(labels):
        cells = [col[i].rjust(w) for col, w in zip(cols, widths)]
        lines.append("  ".join([label.ljust(lw)] + cells))
    return "\n".join(lines) + "\n"


def render_report(r: EvaluationReport, decimals: int = 4, confusion: bool = True) -> str:
    """Single-pipeline summary with counts and percentages, plus the confusion matrix."""
    err = 100.0 * r.incorrectly_classified / r.total
    out = [f"=== {r.classifier} ({len(r.fold_accuracies)}-fold stratified cross-validation, seed {r.seed}) ===",
           f"Correctly identified instances    {r.correctly_classified:>6d}  {r.accuracy_percent:.{decimals}f} %",
           f"Incorrectly identified instances  {r.incorrectly_classified:>6d}  {err:.{decimals}f} %",
           f"Total instances                   {r.total:>6d}"]
    if confusion:
        out.append("")
        out.append(render_confusion(r))
    return "\n".join(out) + "\n"


def render_confusion(r: EvaluationReport) -> str:
    names = list(r.class_names)
    letters = [chr(ord("a") + i) if i < 26 else f"c{i}" for i in range(len(names))]
    width = max(4, len(str(int(r.confusion.max(initial=0)))) + 1)
    head = "".join(l.rjust(width) for l in letters) + "   <-- classified as"
    rows = [head]
    for i, name in enumerate(names):
        rows.append("".join(str(int(v)).rjust(width) for v in r.confusion[i]) + f" | {letters[i]} = {name}")
    return "\n".join(rows)


def reports_to_csv(reports: list[EvaluationReport], decimals: int = 4) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in reports:
        w.writerow(r.row(decimals))
    return buf.getvalue()


def reports_to_json(reports: list[EvaluationReport], decimals: int = 4) -> str:
    return json.dumps([r.row(decimals) for r in reports], indent=2) + "\n"
