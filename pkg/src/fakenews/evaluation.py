"""Macro-averaged evaluation and the feature-group ablation harness.

The fake class is the positive class (+1).  Macro metrics are unweighted
means over the two classes; a per-class precision or F1 with a zero
denominator counts as 0 and is logged, which reproduces the majority-class
baseline identity Acc = 100p, macroP = 50p, macroR = 50, macroF1 = 100p/(1+p)
for a test prior p.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import Dataset
from .errors import DataError
from . import features as feat
from . import svm as svm_mod

logger = logging.getLogger(__name__)

# ablation row aliases on top of the schema group names
GROUP_ALIASES = {
    "feats": ("pmi", "readability", "orthographic", "irregular", "grammatical", "embedding"),
    "attnn": ("task_embedding",),
}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    """Macro precision/recall/F1 and accuracy, all as percentages."""

    precision: float
    recall: float
    f1: float
    accuracy: float

    def row(self, label: str) -> str:
        return (f"{label},{self.precision:.2f},{self.recall:.2f},"
                f"{self.f1:.2f},{self.accuracy:.2f}")


def confusion(preds, gold) -> ConfusionCounts:
    preds = np.asarray(preds)
    gold = np.asarray(gold)
    if preds.shape != gold.shape:
        raise ValueError(f"length mismatch: {preds.shape} vs {gold.shape}")
    return ConfusionCounts(
        tp=int(np.sum((preds == 1) & (gold == 1))),
        fp=int(np.sum((preds == 1) & (gold == -1))),
        tn=int(np.sum((preds == -1) & (gold == -1))),
        fn=int(np.sum((preds == -1) & (gold == 1))),
    )


def _safe_div(num: float, den: float, what: str) -> float:
    if den == 0:
        logger.warning("undefined %s (zero denominator); using 0 by convention", what)
        return 0.0
    return num / den


def macro_metrics(c: ConfusionCounts) -> Metrics:
    if c.total == 0:
        raise ValueError("no evaluated items")
    p_pos = _safe_div(c.tp, c.tp + c.fp, "positive precision")
    r_pos = _safe_div(c.tp, c.tp + c.fn, "positive recall")
    f_pos = _safe_div(2 * p_pos * r_pos, p_pos + r_pos, "positive F1")
    p_neg = _safe_div(c.tn, c.tn + c.fn, "negative precision")
    r_neg = _safe_div(c.tn, c.tn + c.fp, "negative recall")
    f_neg = _safe_div(2 * p_neg * r_neg, p_neg + r_neg, "negative F1")
    return Metrics(
        precision=100.0 * (p_pos + p_neg) / 2.0,
        recall=100.0 * (r_pos + r_neg) / 2.0,
        f1=100.0 * (f_pos + f_neg) / 2.0,
        accuracy=100.0 * (c.tp + c.tn) / c.total,
    )


def fake_labels_pm1(dataset: Dataset) -> np.ndarray:
    return np.array([1 if l else -1 for l in dataset.fake_labels()])


def majority_baseline(train: Dataset, test: Dataset) -> Metrics:
    """Predict the training-majority fake label for every test item."""
    y_train = fake_labels_pm1(train)
    y_test = fake_labels_pm1(test)
    if y_train.size == 0 or y_test.size == 0:
        raise DataError("majority baseline needs non-empty labeled train and test sets")
    majority = 1 if np.sum(y_train == 1) >= np.sum(y_train == -1) else -1
    preds = np.full_like(y_test, majority)
    return macro_metrics(confusion(preds, y_test))


def resolve_groups(subset: str | tuple[str, ...]) -> tuple[str, ...]:
    """Expand a row spec like 'tfidf+feats+attnn' into schema group names."""
    if isinstance(subset, str):
        parts = [p.strip() for p in subset.split("+") if p.strip()]
    else:
        parts = list(subset)
    groups: list[str] = []
    for part in parts:
        if part in GROUP_ALIASES:
            groups.extend(GROUP_ALIASES[part])
        elif part in feat.GROUP_ORDER:
            groups.append(part)
        else:
            raise ValueError(f"unknown feature group {part!r}")
    return tuple(dict.fromkeys(groups))


def subset_label(subset: str | tuple[str, ...]) -> str:
    if isinstance(subset, str):
        return subset
    return "+".join(subset)


@dataclass(frozen=True)
class AblationRow:
    label: str
    metrics: Metrics


def ablation_run(subsets, schema: feat.FeatureSchema,
                 train_matrix: np.ndarray, test_matrix: np.ndarray,
                 train_dataset: Dataset, test_dataset: Dataset,
                 grid: svm_mod.GridSearchSpec, seed: int = 0,
                 threads: int = 1) -> list[AblationRow]:
    """One (P, R, F1, Acc) row per feature-group subset.

    'baseline' rows use the majority-class predictor; every other row slices
    the pre-built feature matrices, rescales, grid-searches and trains an SVM
    on the training rows, then scores the test rows.
    """
    y_train = fake_labels_pm1(train_dataset)
    y_test = fake_labels_pm1(test_dataset)
    rows: list[AblationRow] = []
    for row_index, subset in enumerate(subsets):
        label = subset_label(subset)
        if label == "baseline":
            rows.append(AblationRow(label=label, metrics=majority_baseline(train_dataset, test_dataset)))
            continue
        cols = schema.group_slice(set(resolve_groups(subset)))
        if cols.size == 0:
            raise ValueError(f"subset {label!r} selects no features")
        scaler = feat.fit_scaler(train_matrix[:, cols])
        x_train = feat.apply_scaler(scaler, train_matrix[:, cols])
        x_test = feat.apply_scaler(scaler, test_matrix[:, cols])
        best_c, best_gamma, _ = svm_mod.grid_search_cv(x_train, y_train, grid, threads=threads)
        model = svm_mod.train_smo(x_train, y_train, C=best_c, gamma=best_gamma,
                                  seed=seed + 31 * row_index)
        preds = svm_mod.predict_labels(model, x_test)
        rows.append(AblationRow(label=label, metrics=macro_metrics(confusion(preds, y_test))))
    return rows


def write_report_csv(rows: list[AblationRow], path) -> None:
    """row_label,P,R,F1,Acc with two decimals, matching the table formatting."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("row_label,P,R,F1,Acc\n")
        for row in rows:
            fh.write(row.metrics.row(row.label) + "\n")


def format_report(rows: list[AblationRow]) -> str:
    lines = ["row_label,P,R,F1,Acc"]
    lines += [row.metrics.row(row.label) for row in rows]
    return "\n".join(lines)
