"""Binary logistic regression fitted by damped Newton iterations.

The objective is the l2-regularized negative log-likelihood

    J(w, b) = sum_i log(1 + exp(-t_i (w.x_i + b))) + (l2/2) ||w||^2

with t = 2y - 1 and an unpenalized intercept. Regularization keeps the
optimum bounded even under perfect separation.
"""

from __future__ import annotations

import numpy as np

from ..datasets import Dataset
from ..errors import TrainingError
from ..selection import FeatureSet
from .base import LR, Hyperparams, TrainedModel, as_feature_matrix, check_training_data, derive_feature_set

L2_DEFAULT = 1.0
MAX_ITERATIONS = 100


def sigmoid(z):
    """Numerically stable logistic function, elementwise on arrays.

    Never exponentiates a positive argument, so |z| up to and beyond 1000 is
    safe from overflow.
    """
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    nonneg = z >= 0
    out[nonneg] = 1.0 / (1.0 + np.exp(-z[nonneg]))
    expz = np.exp(z[~nonneg])
    out[~nonneg] = expz / (1.0 + expz)
    if out.ndim == 0:
        return float(out)
    return out


def objective(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = L2_DEFAULT) -> float:
    """J at theta = (w_1..w_d, b)."""
    w, b = theta[:-1], theta[-1]
    t = 2.0 * y - 1.0
    z = X @ w + b
    nll = float(np.sum(np.logaddexp(0.0, -t * z)))
    return nll + 0.5 * l2 * float(w @ w)


def gradient(theta: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float = L2_DEFAULT) -> np.ndarray:
    """Analytic gradient of the objective at theta."""
    w, b = theta[:-1], theta[-1]
    p = sigmoid(X @ w + b)
    residual = p - y
    grad_w = X.T @ residual + l2 * w
    grad_b = float(np.sum(residual))
    return np.concatenate([grad_w, [grad_b]])


def fit_lr(train: Dataset, h: Hyperparams, feature_set: FeatureSet | None = None) -> TrainedModel:
    if h.variant != LR:
        raise TrainingError(f"fit_lr called with variant {h.variant!r}")
    check_training_data(train)
    fs = derive_feature_set(train, feature_set)
    X = np.asarray(train.rows, dtype=np.float64)
    y = np.asarray(train.labels, dtype=np.float64)
    d = X.shape[1]
    theta = np.zeros(d + 1)
    l2 = L2_DEFAULT
    obj = objective(theta, X, y, l2)
    for _ in range(MAX_ITERATIONS):
        grad = gradient(theta, X, y, l2)
        if float(np.max(np.abs(grad))) < h.lr_solver_tolerance:
            break
        p = sigmoid(X @ theta[:-1] + theta[-1])
        weights = p * (1.0 - p)
        Xa = np.hstack([X, np.ones((X.shape[0], 1))])
        hessian = Xa.T @ (weights[:, None] * Xa)
        hessian[np.diag_indices(d)] += l2
        hessian[np.diag_indices(d + 1)] += 1e-10  # keep the solve well-posed
        direction = np.linalg.solve(hessian, -grad)
        step = 1.0
        descent = float(grad @ direction)
        for _ in range(60):
            candidate = theta + step * direction
            new_obj = objective(candidate, X, y, l2)
            if new_obj <= obj + 1e-4 * step * descent:
                break
            step *= 0.5
        theta = theta + step * direction
        obj = objective(theta, X, y, l2)
    return TrainedModel(
        variant=LR,
        feature_set=fs,
        hyperparams=h,
        payload={"weights": theta[:-1].copy(), "intercept": float(theta[-1])},
    )


def decision_values(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    return X @ np.asarray(model.payload["weights"]) + model.payload["intercept"]


def predict_lr_batch(model: TrainedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scores = sigmoid(decision_values(model, as_feature_matrix(model, X)))
    scores = np.atleast_1d(scores)
    return (scores > 0.5).astype(np.int64), scores
