"""The classifier family: KNN, LDA, QDA, RBF-SVM, and L1 logistic regression."""

from .base import (
    DegenerateCovariance,
    FitError,
    Knn,
    Lda,
    LogRegL1,
    Qda,
    RiskEstimate,
    SvmRbf,
    fit,
    fit_arrays,
    misclassification_rate,
    predict,
)
from .logistic import cv_select_lambda, lambda_grid_for

__all__ = [
    "DegenerateCovariance",
    "FitError",
    "Knn",
    "Lda",
    "LogRegL1",
    "Qda",
    "RiskEstimate",
    "SvmRbf",
    "fit",
    "fit_arrays",
    "misclassification_rate",
    "predict",
    "cv_select_lambda",
    "lambda_grid_for",
]
