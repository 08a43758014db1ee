"""Confusion-matrix metrics, ROC/AUC, K-fold cross-validation and timing.

Positive means class 1 throughout. The reported "specificity" follows the
source convention FP / (TN + FP) -- numerically the false-positive rate, which
is exactly the ROC x-axis -- and is therefore named specificity_fpr here. Any
0/0 metric is defined as 0 and flagged.
"""

from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .classifiers import Hyperparams, TrainedModel
from .classifiers import fit as fit_classifier
from .classifiers import predict_batch
from .datasets import Dataset, FoldPlan, fold_subsets
from .errors import EvaluationError
from .selection import FeatureSet, project


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise EvaluationError("confusion counts cannot be negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    specificity_fpr: float
    degenerate: tuple[str, ...] = ()  # metrics whose denominator was 0


@dataclass(frozen=True)
class RocCurve:
    """Points (fpr, tpr) swept from threshold +inf downward."""

    points: tuple[tuple[float, float], ...]
    thresholds: tuple[float, ...]

    def __post_init__(self) -> None:
        pts = self.points
        if not pts or pts[0] != (0.0, 0.0) or pts[-1] != (1.0, 1.0):
            raise EvaluationError("an ROC curve must run from (0,0) to (1,1)")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 < x0 or y1 < y0:
                raise EvaluationError("ROC points must be coordinatewise nondecreasing")


@dataclass(frozen=True)
class EvalReport:
    cm: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    specificity_fpr: float
    auc: float
    per_sample_time: float
    degenerate: tuple[str, ...] = ()
    cv_mean: float | None = None  # percent, over folds
    cv_std: float | None = None  # percent, population std over folds
    fold_accuracies: tuple[float, ...] = ()
    roc_points: tuple[tuple[float, float], ...] = ()

    def to_row(self) -> dict:
        return {
            "tp": self.cm.tp,
            "fp": self.cm.fp,
            "fn": self.cm.fn,
            "tn": self.cm.tn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "specificity_fpr": self.specificity_fpr,
            "auc": self.auc,
            "per_sample_time": self.per_sample_time,
            "cv_mean": self.cv_mean,
            "cv_std": self.cv_std,
        }


def confusion(pred_labels, true_labels) -> ConfusionMatrix:
    """Count tp/fp/fn/tn with class 1 as positive."""
    pred = np.asarray(pred_labels, dtype=np.int64)
    truth = np.asarray(true_labels, dtype=np.int64)
    if pred.shape != truth.shape:
        raise EvaluationError(f"length mismatch: {pred.shape} predictions vs {truth.shape} labels")
    if not (set(np.unique(pred).tolist()) <= {0, 1} and set(np.unique(truth).tolist()) <= {0, 1}):
        raise EvaluationError("labels must be 0 or 1")
    return ConfusionMatrix(
        tp=int(np.sum((pred == 1) & (truth == 1))),
        fp=int(np.sum((pred == 1) & (truth == 0))),
        fn=int(np.sum((pred == 0) & (truth == 1))),
        tn=int(np.sum((pred == 0) & (truth == 0))),
    )


def _ratio(num: int, den: int, name: str, flags: list[str]) -> float:
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def metrics(cm: ConfusionMatrix) -> Metrics:
    """Accuracy, precision, recall and FP/(TN+FP), exactly as printed."""
    if cm.total == 0:
        raise EvaluationError("cannot compute metrics of an empty confusion matrix")
    flags: list[str] = []
    return Metrics(
        accuracy=(cm.tp + cm.tn) / cm.total,
        precision=_ratio(cm.tp, cm.tp + cm.fp, "precision", flags),
        recall=_ratio(cm.tp, cm.tp + cm.fn, "recall", flags),
        specificity_fpr=_ratio(cm.fp, cm.tn + cm.fp, "specificity_fpr", flags),
        degenerate=tuple(flags),
    )


def roc(scores, truth) -> RocCurve:
    """One point per distinct threshold, swept from +inf down; ties collapse."""
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.int64)
    if scores.shape != truth.shape:
        raise EvaluationError("scores and truth must have equal length")
    positives = int(np.sum(truth == 1))
    negatives = int(np.sum(truth == 0))
    if positives == 0 or negatives == 0:
        raise EvaluationError("ROC needs both classes in the truth vector")
    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_truth = truth[order]
    points = [(0.0, 0.0)]
    thresholds = [math.inf]
    tp = fp = 0
    i = 0
    n = scores.size
    while i < n:
        threshold = sorted_scores[i]
        while i < n and sorted_scores[i] == threshold:
            if sorted_truth[i] == 1:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((fp / negatives, tp / positives))
        thresholds.append(float(threshold))
    return RocCurve(points=tuple(points), thresholds=tuple(thresholds))


def auc(curve: RocCurve) -> float:
    """Trapezoidal area; equals the pair-counting statistic with half ties."""
    area = 0.0
    for (x0, y0), (x1, y1) in zip(curve.points, curve.points[1:]):
        area += (x1 - x0) * (y0 + y1) / 2.0
    return area


def time_predictions(predict_fn, model, rows) -> tuple[np.ndarray, np.ndarray, float]:
    """Run predictions with a warm pass then 3 timed passes; report the median
    wall-clock total (monotonic clock)."""
    labels, scores = predict_fn(model, rows)  # warm pass
    timings = []
    for _ in range(3):
        start = time.perf_counter()
        labels, scores = predict_fn(model, rows)
        timings.append(time.perf_counter() - start)
    return labels, scores, statistics.median(timings)


def evaluate_model(
    model: TrainedModel,
    heldout: Dataset,
    predict_fn=predict_batch,
) -> EvalReport:
    """Score one fitted model on a held-out encoded dataset."""
    labels, scores, elapsed = time_predictions(predict_fn, model, heldout.rows)
    cm = confusion(labels, heldout.labels)
    m = metrics(cm)
    neg, pos = heldout.class_counts()
    if neg and pos:
        curve = roc(scores, heldout.labels)
        area = auc(curve)
        points = curve.points
    else:  # single-class fold: AUC undefined, reported as nan
        area = math.nan
        points = ()
    return EvalReport(
        cm=cm,
        accuracy=m.accuracy,
        precision=m.precision,
        recall=m.recall,
        specificity_fpr=m.specificity_fpr,
        auc=area,
        per_sample_time=elapsed / max(heldout.n_rows, 1),
        degenerate=m.degenerate,
        roc_points=points,
    )


def cross_validate(
    d: Dataset,
    fs: FeatureSet,
    h: Hyperparams,
    plan: FoldPlan,
    *,
    fit_fn=None,
    predict_fn=None,
) -> EvalReport:
    """K-fold cross-validation of one (feature set, hyperparams) choice.

    Each fold's model trains on the other k-1 folds and scores the held-out
    fold; no row is ever evaluated by a model that saw it. The aggregate
    confusion matrix is the sum over folds; cv_mean/cv_std are the mean and
    population standard deviation of per-fold accuracy in percent; AUC is
    computed over the pooled held-out scores.
    """
    if len(plan.fold_assignments) != d.n_rows:
        raise EvaluationError(
            f"fold plan covers {len(plan.fold_assignments)} rows, dataset has {d.n_rows}"
        )
    fit_fn = fit_fn or (lambda train, hp: fit_classifier(train, hp, feature_set=fs))
    predict_fn = predict_fn or predict_batch
    projected = project(d, fs)
    cm = ConfusionMatrix(0, 0, 0, 0)
    fold_accuracies: list[float] = []
    pooled_scores: list[float] = []
    pooled_truth: list[int] = []
    total_time = 0.0
    total_predictions = 0
    for fold in range(plan.k):
        train, held = fold_subsets(projected, plan, fold)
        try:
            model = fit_fn(train, h)
            labels, scores, elapsed = time_predictions(predict_fn, model, held.rows)
        except Exception as exc:
            raise EvaluationError(f"fold {fold}: {exc}") from exc
        fold_cm = confusion(labels, held.labels)
        cm = cm.add(fold_cm)
        fold_accuracies.append(100.0 * (fold_cm.tp + fold_cm.tn) / fold_cm.total)
        pooled_scores.extend(np.asarray(scores, dtype=float).tolist())
        pooled_truth.extend(np.asarray(held.labels, dtype=int).tolist())
        total_time += elapsed
        total_predictions += held.n_rows
    m = metrics(cm)
    curve = roc(pooled_scores, pooled_truth)
    cv_mean = float(np.mean(fold_accuracies))
    cv_std = float(np.std(fold_accuracies))  # population std over folds
    return EvalReport(
        cm=cm,
        accuracy=m.accuracy,
        precision=m.precision,
        recall=m.recall,
        specificity_fpr=m.specificity_fpr,
        auc=auc(curve),
        per_sample_time=total_time / max(total_predictions, 1),
        degenerate=m.degenerate,
        cv_mean=cv_mean,
        cv_std=cv_std,
        fold_accuracies=tuple(fold_accuracies),
        roc_points=curve.points,
    )


def roc_points_csv(report: EvalReport) -> str:
    lines = ["fpr,tpr"]
    lines += [f"{x:.10g},{y:.10g}" for x, y in report.roc_points]
    return "\n".join(lines) + "\n"
