"""Support vector machine with a squared hinge loss, solved in the primal.

linear kernel:
    minimize 0.5 ||w||^2 + C * sum_i max(0, 1 - t_i (w.x_i + b))^2

rbf kernel (function f(x) = sum_i c_i K(x_i, x) + b, K = exp(-gamma |u-v|^2)):
    minimize 0.5 c'Kc + C * sum_i max(0, 1 - t_i f(x_i))^2

Both use damped Newton steps on the (continuously differentiable) objective
and stop when the objective decreases by less than 1e-10 or after 10^4
iterations; the procedure is fully deterministic. The decision value is the
signed distance-like score f(x); the predicted class is the one whose signed
score is larger, i.e. 1 exactly when f(x) > 0.
"""

from __future__ import annotations

import numpy as np

from ..datasets import Dataset
from ..errors import TrainingError
from ..selection import FeatureSet
from .base import SVM, Hyperparams, TrainedModel, as_feature_matrix, check_training_data, derive_feature_set
from .logistic import sigmoid

OBJECTIVE_DECREASE = 1e-10
MAX_ITERATIONS = 10_000


def linear_objective(theta: np.ndarray, X: np.ndarray, t: np.ndarray, c: float) -> float:
    """Primal squared-hinge objective at theta = (w, b); t in {-1, +1}."""
    w, b = theta[:-1], theta[-1]
    margins = 1.0 - t * (X @ w + b)
    violations = np.maximum(margins, 0.0)
    return 0.5 * float(w @ w) + c * float(violations @ violations)


def _newton_minimize(objective, gradient, hessian, theta: np.ndarray) -> np.ndarray:
    obj = objective(theta)
    for _ in range(MAX_ITERATIONS):
        grad = gradient(theta)
        H = hessian(theta)
        H = H + 1e-10 * np.eye(H.shape[0])
        direction = np.linalg.solve(H, -grad)
        descent = float(grad @ direction)
        step = 1.0
        new_obj = obj
        for _ in range(60):
            candidate = theta + step * direction
            new_obj = objective(candidate)
            if new_obj <= obj + 1e-4 * step * descent:
                break
            step *= 0.5
        theta = theta + step * direction
        if obj - new_obj < OBJECTIVE_DECREASE:
            obj = new_obj
            break
        obj = new_obj
    return theta


def _fit_linear(X: np.ndarray, t: np.ndarray, c: float) -> tuple[np.ndarray, float]:
    n, d = X.shape
    Xa = np.hstack([X, np.ones((n, 1))])
    reg = np.ones(d + 1)
    reg[-1] = 0.0  # intercept unpenalized

    def objective(theta: np.ndarray) -> float:
        return linear_objective(theta, X, t, c)

    def gradient(theta: np.ndarray) -> np.ndarray:
        margins = 1.0 - t * (Xa @ theta)
        active = margins > 0
        grad = reg * theta
        grad -= 2.0 * c * Xa.T @ (t * margins * active)
        return grad

    def hessian(theta: np.ndarray) -> np.ndarray:
        margins = 1.0 - t * (Xa @ theta)
        active = margins > 0
        Xsv = Xa[active]
        return np.diag(reg) + 2.0 * c * Xsv.T @ Xsv

    theta = _newton_minimize(objective, gradient, hessian, np.zeros(d + 1))
    return theta[:-1], float(theta[-1])


def rbf_kernel(U: np.ndarray, V: np.ndarray, gamma: float) -> np.ndarray:
    sq = np.sum(U * U, axis=1)[:, None] + np.sum(V * V, axis=1)[None, :] - 2.0 * (U @ V.T)
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _fit_rbf(X: np.ndarray, t: np.ndarray, c: float, gamma: float) -> tuple[np.ndarray, float]:
    n = X.shape[0]
    K = rbf_kernel(X, X, gamma)
    A = np.hstack([K, np.ones((n, 1))])  # maps (coef, b) to decision values

    def objective(theta: np.ndarray) -> float:
        coef = theta[:-1]
        margins = 1.0 - t * (A @ theta)
        violations = np.maximum(margins, 0.0)
        return 0.5 * float(coef @ (K @ coef)) + c * float(violations @ violations)

    def gradient(theta: np.ndarray) -> np.ndarray:
        coef = theta[:-1]
        margins = 1.0 - t * (A @ theta)
        active = margins > 0
        grad = np.concatenate([K @ coef, [0.0]])
        grad -= 2.0 * c * A.T @ (t * margins * active)
        return grad

    def hessian(theta: np.ndarray) -> np.ndarray:
        margins = 1.0 - t * (A @ theta)
        active = margins > 0
        Asv = A[active]
        H = 2.0 * c * Asv.T @ Asv
        H[:n, :n] += K
        return H

    theta = _newton_minimize(objective, gradient, hessian, np.zeros(n + 1))
    return theta[:-1], float(theta[-1])


def fit_svm(train: Dataset, h: Hyperparams, feature_set: FeatureSet | None = None) -> TrainedModel:
    if h.variant != SVM:
        raise TrainingError(f"fit_svm called with variant {h.variant!r}")
    check_training_data(train)
    fs = derive_feature_set(train, feature_set)
    X = np.asarray(train.rows, dtype=np.float64)
    t = 2.0 * np.asarray(train.labels, dtype=np.float64) - 1.0
    if h.svm_kernel == "linear":
        weights, intercept = _fit_linear(X, t, h.svm_c)
        payload = {"kernel": "linear", "weights": weights, "intercept": intercept}
    else:
        gamma = h.svm_rbf_gamma if h.svm_rbf_gamma is not None else 1.0 / X.shape[1]
        coef, intercept = _fit_rbf(X, t, h.svm_c, gamma)
        payload = {
            "kernel": "rbf",
            "coef": coef,
            "intercept": intercept,
            "support_rows": X.copy(),
            "gamma": gamma,
        }
    return TrainedModel(variant=SVM, feature_set=fs, hyperparams=h, payload=payload)


def decision_values(model: TrainedModel, X: np.ndarray) -> np.ndarray:
    payload = model.payload
    if payload["kernel"] == "linear":
        return X @ np.asarray(payload["weights"]) + payload["intercept"]
    K = rbf_kernel(X, np.asarray(payload["support_rows"]), payload["gamma"])
    return K @ np.asarray(payload["coef"]) + payload["intercept"]


def predict_svm_batch(model: TrainedModel, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    values = decision_values(model, as_feature_matrix(model, X))
    return (values > 0).astype(np.int64), np.atleast_1d(sigmoid(values))
