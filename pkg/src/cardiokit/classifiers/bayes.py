"""Naive Bayes with learned class priors and additive smoothing.

Both flavors store everything in log space and predict by

    label = argmax_c [ log P(c) + sum_j log P(x_j | c) ]

with the class-1 posterior (log-sum-exp normalized) as the ROC score.

categorical: per attribute j with code universe V_j,
    P(v | c) = (count(v, c) + alpha) / (n_c + alpha * |V_j|)
so the per-(class, attribute) likelihoods sum to one over V_j. A code never
seen in training keeps the count-0 numerator (no error).

multinomial: likelihoods over per-attribute value mass,
    P(j | c) = (mass(j, c) + alpha) / (total_mass(c) + alpha * m).
Negative feature values are rejected.
"""

from __future__ import annotations

import numpy as np

from ..datasets import Dataset
from ..errors import TrainingError
from ..schema import CATEGORICAL
from ..selection import FeatureSet
from .base import (
    NB_CATEGORICAL,
    NB_MULTINOMIAL,
    Hyperparams,
    TrainedModel,
    as_feature_matrix,
    check_training_data,
    derive_feature_set,
)


def _log_priors(y: np.ndarray) -> np.ndarray:
    counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=np.float64)
    return np.log(counts / counts.sum())


def _fit_categorical(X: np.ndarray, y: np.ndarray, alpha: float, train: Dataset) -> dict:
    if not np.all(X == np.round(X)):
        raise TrainingError("the categorical flavor requires integer-coded attributes")
    tables = []
    class_counts = np.array([np.sum(y == 0), np.sum(y == 1)], dtype=np.float64)
    for j in range(X.shape[1]):
        attr = train.attribute_for_column(j)
        if attr.kind == CATEGORICAL and attr.codes:
            universe = sorted(set(attr.codes) | set(int(v) for v in X[:, j]))
        else:
            universe = sorted(set(int(v) for v in X[:, j]))
        n_codes = len(universe)
        log_lik = np.zeros((2, n_codes))
        for c in (0, 1):
            col = X[y == c, j]
            denom = class_counts[c] + alpha * n_codes
            for v_pos, v in enumerate(universe):
                count = float(np.sum(col == v))
                log_lik[c, v_pos] = np.log((count + alpha) / denom)
        unseen = np.log(alpha / (class_counts + alpha * n_codes))
        tables.append({"codes": universe, "log_lik": log_lik, "unseen_log": unseen})
    return {"kind": "categorical", "log_priors": _log_priors(y), "tables": tables}


def _fit_multinomial(X: np.ndarray, y: np.ndarray, alpha: float) -> dict:
    if np.any(X < 0):
        raise TrainingError("the multinomial flavor requires nonnegative feature values")
    m = X.shape[1]
    feature_log_prob = np.zeros((2, m))
    for c in (0, 1):
        mass = X[y == c].sum(axis=0)
        total = float(mass.sum())
        feature_log_prob[c] = np.log((mass + alpha) / (total + alpha * m))
    return {
        "kind": "multinomial",
        "log_priors": _log_priors(y),
        "feature_log_prob": feature_log_prob,
    }


def fit_nb(train: Dataset, h: Hyperparams, feature_set: FeatureSet | None = None) -> TrainedModel:
    if h.variant not in (NB_MULTINOMIAL, NB_CATEGORICAL):
        raise TrainingError(f"fit_nb called with variant {h.variant!r}")
    check_training_data(train)
    fs = derive_feature_set(train, feature_set)
    X = np.asarray(train.rows, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.int64)
    if h.variant == NB_CATEGORICAL:
        payload = _fit_categorical(X, y, h.nb_alpha, train)
    else:
        payload = _fit_multinomial(X, y, h.nb_alpha)
    return TrainedModel(variant=h.variant, feature_set=fs, hyperparams=h, payload=payload)


def log_posteriors(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    """Unnormalized log posteriors, shape (m, 2)."""
    payload = model.payload
    out = np.tile(np.asarray(payload["log_priors"], dtype=np.float64), (X.shape[0], 1))
    if payload["kind"] == "multinomial":
        out += X @ np.asarray(payload["feature_log_prob"]).T
        return out
    for j, table in enumerate(payload["tables"]):
        codes = {v: pos for pos, v in enumerate(table["codes"])}
        log_lik = np.asarray(table["log_lik"])
        unseen = np.asarray(table["unseen_log"])
        for i, value in enumerate(X[:, j]):
            pos = codes.get(int(value)) if float(value) == int(value) else None
            out[i] += log_lik[:, pos] if pos is not None else unseen
    return out


def predict_nb_batch(model: TrainedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    X = as_feature_matrix(model, X)
    lp = log_posteriors(model, X)
    labels = (lp[:, 1] > lp[:, 0]).astype(np.int64)
    shift = lp.max(axis=1, keepdims=True)
    norm = np.exp(lp - shift)
    scores = norm[:, 1] / norm.sum(axis=1)
    return labels, scores
