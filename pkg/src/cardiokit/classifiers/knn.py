"""K-nearest-neighbor classification under Euclidean distance.

Neighbors are ordered by (distance, training-row index), so equidistant
points resolve to the earlier row. An even-k vote tie falls back to the
majority of the nearer half of the neighborhood, then to label 0.
"""

from __future__ import annotations

import numpy as np

from ..datasets import Dataset
from ..errors import PredictionError, TrainingError
from ..selection import FeatureSet
from .base import KNN, Hyperparams, TrainedModel, as_feature_matrix, check_training_data, derive_feature_set


def euclidean(p, q) -> float:
    """sqrt of the summed squared coordinate differences of two vectors."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise PredictionError(f"vector arities differ: {p.shape} vs {q.shape}")
    return float(np.sqrt(np.sum((q - p) ** 2)))


def fit_knn(train: Dataset, h: Hyperparams, feature_set: FeatureSet | None = None) -> TrainedModel:
    if h.variant != KNN:
        raise TrainingError(f"fit_knn called with variant {h.variant!r}")
    check_training_data(train, need_both_classes=False)
    if h.knn_k > train.n_rows:
        raise TrainingError(f"knn_k={h.knn_k} exceeds the training size {train.n_rows}")
    fs = derive_feature_set(train, feature_set)
    return TrainedModel(
        variant=KNN,
        feature_set=fs,
        hyperparams=h,
        payload={
            "rows": np.asarray(train.rows, dtype=np.float64).copy(),
            "labels": np.asarray(train.labels, dtype=np.int64).copy(),
        },
    )


def _vote(neighbor_labels: np.ndarray) -> int:
    k = neighbor_labels.size
    positives = int(neighbor_labels.sum())
    if positives * 2 > k:
        return 1
    if positives * 2 < k:
        return 0
    nearer = neighbor_labels[: k // 2]  # tie: defer to the nearer half
    if nearer.size and int(nearer.sum()) * 2 > nearer.size:
        return 1
    return 0


def predict_knn_batch(model: TrainedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = as_feature_matrix(model, X)
    rows = model.payload["rows"]
    train_labels = model.payload["labels"]
    k = model.hyperparams.knn_k
    if k > rows.shape[0]:
        raise PredictionError(f"knn_k={k} exceeds the stored training size {rows.shape[0]}")
    diffs = X[:, None, :] - rows[None, :, :]
    distances = np.sqrt(np.sum(diffs * diffs, axis=2))
    # stable argsort keeps the lower training-row index first on distance ties
    order = np.argsort(distances, axis=1, kind="stable")[:, :k]
    labels = np.zeros(X.shape[0], dtype=np.int64)
    scores = np.zeros(X.shape[0], dtype=np.float64)
    for i in range(X.shape[0]):
        neighbor_labels = train_labels[order[i]]
        labels[i] = _vote(neighbor_labels)
        scores[i] = float(neighbor_labels.sum()) / k
    return labels, scores
