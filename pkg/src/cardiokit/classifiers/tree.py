"""Decision tree grown by greedy impurity minimization.

Categorical attributes split multiway over the codes observed at the node;
numeric attributes split on the best midpoint threshold. Splits are accepted
even at zero impurity gain (growth is bounded by depth and node purity
instead), which is what lets depth-2 trees solve parity-style interactions
such as 2-bit XOR. For any partition the count-weighted child impurity never
exceeds the parent's.
"""

from __future__ import annotations

import numpy as np

from ..datasets import Dataset
from ..errors import EvaluationError, TrainingError
from ..schema import CATEGORICAL
from ..selection import FeatureSet
from .base import DT, Hyperparams, TrainedModel, as_feature_matrix, check_training_data, derive_feature_set


def gini(class_counts) -> float:
    """Impurity 1 - sum_i P(c_i)^2 of a count vector; 0 for a pure node."""
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or np.any(counts < 0) or counts.sum() == 0:
        raise EvaluationError(f"gini needs nonnegative counts with a positive total, got {class_counts}")
    p = counts / counts.sum()
    return float(1.0 - np.sum(p * p))


def entropy(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.size == 0 or np.any(counts < 0) or counts.sum() == 0:
        raise EvaluationError(f"entropy needs nonnegative counts with a positive total, got {class_counts}")
    p = counts / counts.sum()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def _impurity_fn(criterion: str):
    return gini if criterion == "gini" else entropy


def _class_counts(y: np.ndarray) -> list[int]:
    return [int(np.sum(y == 0)), int(np.sum(y == 1))]


def _best_categorical_split(col: np.ndarray, y: np.ndarray, impurity) -> tuple[float, dict] | None:
    codes = np.unique(col)
    if codes.size < 2:
        return None
    total = col.size
    weighted = 0.0
    branches: dict[float, np.ndarray] = {}
    for code in codes:
        mask = col == code
        branches[float(code)] = mask
        weighted += (mask.sum() / total) * impurity(_class_counts(y[mask]))
    return weighted, branches


def _best_numeric_split(col: np.ndarray, y: np.ndarray, impurity) -> tuple[float, float] | None:
    order = np.argsort(col, kind="stable")
    values = col[order]
    labels = y[order]
    change = np.nonzero(values[:-1] != values[1:])[0]
    if change.size == 0:
        return None
    ones = np.cumsum(labels)
    total_ones = int(ones[-1])
    n = col.size
    best = None
    for i in change:
        left_n = int(i) + 1
        left_ones = int(ones[i])
        left = impurity([left_n - left_ones, left_ones])
        right_n = n - left_n
        right_ones = total_ones - left_ones
        right = impurity([right_n - right_ones, right_ones])
        weighted = (left_n / n) * left + (right_n / n) * right
        threshold = (values[i] + values[i + 1]) / 2.0
        if best is None or weighted < best[0] - 1e-15:
            best = (weighted, float(threshold))
    return best


def _grow(X: np.ndarray, y: np.ndarray, kinds: list[str], depth: int, max_depth: int, impurity) -> dict:
    counts = _class_counts(y)
    node = {"counts": counts}
    if depth >= max_depth or counts[0] == 0 or counts[1] == 0:
        node["leaf"] = True
        return node
    best = None  # (weighted impurity, column, detail)
    for j in range(X.shape[1]):
        col = X[:, j]
        if kinds[j] == CATEGORICAL:
            result = _best_categorical_split(col, y, impurity)
            if result is not None and (best is None or result[0] < best[0] - 1e-15):
                best = (result[0], j, ("categorical", result[1]))
        else:
            result = _best_numeric_split(col, y, impurity)
            if result is not None and (best is None or result[0] < best[0] - 1e-15):
                best = (result[0], j, ("numeric", result[1]))
    if best is None:  # every attribute is constant here
        node["leaf"] = True
        return node
    _, column, (kind, detail) = best
    node["leaf"] = False
    node["column"] = column
    node["kind"] = kind
    if kind == "categorical":
        node["branches"] = {
            code: _grow(X[mask], y[mask], kinds, depth + 1, max_depth, impurity)
            for code, mask in detail.items()
        }
    else:
        threshold = detail
        mask = X[:, column] <= threshold
        node["threshold"] = threshold
        node["low"] = _grow(X[mask], y[mask], kinds, depth + 1, max_depth, impurity)
        node["high"] = _grow(X[~mask], y[~mask], kinds, depth + 1, max_depth, impurity)
    return node


def fit_dt(train: Dataset, h: Hyperparams, feature_set: FeatureSet | None = None) -> TrainedModel:
    if h.variant != DT:
        raise TrainingError(f"fit_dt called with variant {h.variant!r}")
    check_training_data(train, need_both_classes=False)
    fs = derive_feature_set(train, feature_set)
    X = np.asarray(train.rows, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.int64)
    kinds = [train.attribute_for_column(j).kind for j in range(X.shape[1])]
    tree = _grow(X, y, kinds, depth=0, max_depth=h.dt_max_depth, impurity=_impurity_fn(h.dt_criterion))
    return TrainedModel(
        variant=DT,
        feature_set=fs,
        hyperparams=h,
        payload={"tree": tree, "kinds": kinds},
    )


def tree_depth(node: dict) -> int:
    if node.get("leaf"):
        return 0
    if node["kind"] == "categorical":
        children = node["branches"].values()
    else:
        children = (node["low"], node["high"])
    return 1 + max(tree_depth(child) for child in children)


def _descend(node: dict, x: np.ndarray) -> dict:
    while not node.get("leaf"):
        if node["kind"] == "categorical":
            child = node["branches"].get(float(x[node["column"]]))
            if child is None:
                return node  # unseen code: answer with this node's class mix
            node = child
        else:
            node = node["low"] if x[node["column"]] <= node["threshold"] else node["high"]
    return node


def predict_dt_batch(model: TrainedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = as_feature_matrix(model, X)
    labels = np.zeros(X.shape[0], dtype=np.int64)
    scores = np.zeros(X.shape[0], dtype=np.float64)
    root = model.payload["tree"]
    for i, x in enumerate(X):
        node = _descend(root, x)
        n0, n1 = node["counts"]
        labels[i] = 1 if n1 > n0 else 0
        scores[i] = n1 / (n0 + n1)
    return labels, scores
