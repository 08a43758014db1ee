"""Shared learner plumbing: hyperparameters, the trained-model container and
the uniform fit/predict dispatch over the five variants."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..datasets import Dataset
from ..errors import HyperparameterError, PredictionError, TrainingError
from ..selection import FeatureSet

LR = "LR"
DT = "DT"
KNN = "KNN"
NB_MULTINOMIAL = "NB-multinomial"
NB_CATEGORICAL = "NB-categorical"
SVM = "SVM"

VARIANTS = (LR, DT, KNN, NB_MULTINOMIAL, NB_CATEGORICAL, SVM)

# Order used for tie-breaking when models score equally.
VARIANT_ORDER = (LR, DT, KNN, NB_MULTINOMIAL, NB_CATEGORICAL, SVM)


@dataclass(frozen=True)
class Hyperparams:
    """Per-variant settings; only the fields of the chosen variant are read."""

    variant: str
    lr_solver_tolerance: float = 1e-8
    dt_criterion: str = "gini"
    dt_max_depth: int = 4
    knn_k: int = 5
    nb_alpha: float = 0.5
    svm_kernel: str = "linear"
    svm_c: float = 1.0
    svm_rbf_gamma: float | None = None  # None -> 1 / n_features

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise HyperparameterError(f"unknown classifier variant {self.variant!r}")
        if self.variant == LR and self.lr_solver_tolerance <= 0:
            raise HyperparameterError("lr_solver_tolerance must be positive")
        if self.variant == DT:
            if self.dt_criterion not in ("gini", "entropy"):
                raise HyperparameterError(f"dt_criterion must be gini or entropy, got {self.dt_criterion!r}")
            if not 3 <= self.dt_max_depth <= 6:
                raise HyperparameterError(f"dt_max_depth must lie in [3, 6], got {self.dt_max_depth}")
        if self.variant == KNN and not 5 <= self.knn_k <= 15:
            raise HyperparameterError(f"knn_k must lie in [5, 15], got {self.knn_k}")
        if self.variant in (NB_MULTINOMIAL, NB_CATEGORICAL) and not 0.5 <= self.nb_alpha <= 0.8:
            raise HyperparameterError(f"nb_alpha must lie in [0.5, 0.8], got {self.nb_alpha}")
        if self.variant == SVM:
            if self.svm_kernel not in ("linear", "rbf"):
                raise HyperparameterError(f"svm_kernel must be linear or rbf, got {self.svm_kernel!r}")
            if self.svm_c <= 0:
                raise HyperparameterError(f"svm_c must be positive, got {self.svm_c}")
            if self.svm_rbf_gamma is not None and self.svm_rbf_gamma <= 0:
                raise HyperparameterError(f"svm_rbf_gamma must be positive, got {self.svm_rbf_gamma}")

    def to_dict(self) -> dict:
        return {
            "variant": self.variant,
            "lr_solver_tolerance": self.lr_solver_tolerance,
            "dt_criterion": self.dt_criterion,
            "dt_max_depth": self.dt_max_depth,
            "knn_k": self.knn_k,
            "nb_alpha": self.nb_alpha,
            "svm_kernel": self.svm_kernel,
            "svm_c": self.svm_c,
            "svm_rbf_gamma": self.svm_rbf_gamma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Hyperparams":
        return cls(**data)


@dataclass(frozen=True)
class TrainedModel:
    """A fitted learner: variant tag, the feature set it consumes, its
    hyperparameters and a variant-specific parameter payload.

    Immutable after fit; safe to share across concurrent predictions.
    """

    variant: str
    feature_set: FeatureSet
    hyperparams: Hyperparams
    payload: dict

    @property
    def n_features(self) -> int:
        return len(self.feature_set)


def check_training_data(train: Dataset, need_both_classes: bool = True) -> None:
    if not train.is_encoded:
        raise TrainingError("learners expect an encoded (or projected) dataset")
    if train.n_rows == 0:
        raise TrainingError("cannot fit on an empty training set")
    if need_both_classes:
        neg, pos = train.class_counts()
        if neg == 0 or pos == 0:
            raise TrainingError(
                f"training set {train.name!r} must contain both classes "
                f"(got {neg} negative / {pos} positive)"
            )


def derive_feature_set(train: Dataset, feature_set: FeatureSet | None) -> FeatureSet:
    if feature_set is not None:
        if tuple(feature_set.indices) != tuple(train.feature_indices):
            raise TrainingError(
                "feature set does not match the dataset's column layout: "
                f"{feature_set.indices} vs {train.feature_indices}"
            )
        return feature_set
    from ..selection import ANOVA  # local import to avoid cycle at module load

    return FeatureSet(
        indices=tuple(train.feature_indices),
        provenance=ANOVA,
        top_n=len(train.feature_indices),
        schema_name=train.schema.name,
    )


def as_feature_matrix(model: TrainedModel, x) -> np.ndarray:
    """Validate arity and return queries as a (m, d) float matrix."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != model.n_features:
        raise PredictionError(
            f"query arity {arr.shape[-1] if arr.ndim else 0} does not match "
            f"the model's {model.n_features} features"
        )
    return arr


def fit(train: Dataset, h: Hyperparams, feature_set: FeatureSet | None = None) -> TrainedModel:
    """Train the learner selected by h.variant on an encoded dataset."""
    from . import bayes, knn, logistic, svm, tree

    fitters = {
        LR: logistic.fit_lr,
        DT: tree.fit_dt,
        KNN: knn.fit_knn,
        NB_MULTINOMIAL: bayes.fit_nb,
        NB_CATEGORICAL: bayes.fit_nb,
        SVM: svm.fit_svm,
    }
    return fitters[h.variant](train, h, feature_set)


def predict_batch(model: TrainedModel, rows) -> tuple[np.ndarray, np.ndarray]:
    """Labels in {0,1} and monotone class-1 confidence scores in [0,1]."""
    from . import bayes, knn, logistic, svm, tree

    predictors = {
        LR: logistic.predict_lr_batch,
        DT: tree.predict_dt_batch,
        KNN: knn.predict_knn_batch,
        NB_MULTINOMIAL: bayes.predict_nb_batch,
        NB_CATEGORICAL: bayes.predict_nb_batch,
        SVM: svm.predict_svm_batch,
    }
    matrix = as_feature_matrix(model, rows)
    labels, scores = predictors[model.variant](model, matrix)
    return labels.astype(np.int64), scores.astype(np.float64)


def predict(model: TrainedModel, x) -> tuple[int, float]:
    """Single-vector convenience wrapper over predict_batch."""
    labels, scores = predict_batch(model, np.asarray(x, dtype=np.float64).reshape(1, -1))
    return int(labels[0]), float(scores[0])
