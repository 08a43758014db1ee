"""Five binary learners behind one train/predict interface."""

from .base import (
    DT,
    KNN,
    LR,
    NB_CATEGORICAL,
    NB_MULTINOMIAL,
    SVM,
    VARIANT_ORDER,
    VARIANTS,
    Hyperparams,
    TrainedModel,
    fit,
    predict,
    predict_batch,
)
from .bayes import fit_nb, log_posteriors, predict_nb_batch
from .knn import euclidean, fit_knn, predict_knn_batch
from .logistic import fit_lr, gradient, objective, predict_lr_batch, sigmoid
from .svm import fit_svm, linear_objective, predict_svm_batch, rbf_kernel
from .tree import entropy, fit_dt, gini, predict_dt_batch, tree_depth

__all__ = [
    "LR",
    "DT",
    "KNN",
    "NB_MULTINOMIAL",
    "NB_CATEGORICAL",
    "SVM",
    "VARIANTS",
    "VARIANT_ORDER",
    "Hyperparams",
    "TrainedModel",
    "fit",
    "predict",
    "predict_batch",
    "sigmoid",
    "gini",
    "entropy",
    "euclidean",
    "fit_lr",
    "fit_dt",
    "fit_knn",
    "fit_nb",
    "fit_svm",
    "gradient",
    "objective",
    "linear_objective",
    "log_posteriors",
    "rbf_kernel",
    "tree_depth",
    "predict_lr_batch",
    "predict_dt_batch",
    "predict_knn_batch",
    "predict_nb_batch",
    "predict_svm_batch",
]
