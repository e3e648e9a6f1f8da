"""Classifier specifications, fit/predict entry points, and risk evaluation.

A classifier is described declaratively by one of the frozen spec dataclasses
(:class:`Knn`, :class:`Lda`, :class:`Qda`, :class:`SvmRbf`, :class:`LogRegL1`)
and turned into an immutable fitted model by :func:`fit`. Fitted models share
a tiny surface: ``n_features``, ``n_classes``, ``converged`` and a vectorized
``predict_batch``; everything else is family-specific state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import LabeledDataset

__all__ = [
    "FitError",
    "DegenerateCovariance",
    "Knn",
    "Lda",
    "Qda",
    "SvmRbf",
    "LogRegL1",
    "RiskEstimate",
    "fit",
    "fit_arrays",
    "predict",
    "misclassification_rate",
]


class FitError(ValueError):
    """Training is impossible for this spec on the given data.

    Search and experiment drivers treat this as "skip the candidate/model"
    rather than a crash.
    """


class DegenerateCovariance(FitError):
    """LDA/QDA covariance is singular even after the ridge, or a class is
    too small to estimate one."""


@dataclass(frozen=True)
class Knn:
    """k-nearest neighbors with Euclidean distance.

    All points tied at the k-th smallest distance join the vote; vote ties go
    to the smaller class index. With fewer training points than `neighbors`,
    every point votes.
    """

    neighbors: int = 15

    def __post_init__(self):
        if self.neighbors < 1:
            raise ValueError("neighbors must be at least 1")


@dataclass(frozen=True)
class Lda:
    """Linear discriminant analysis with a pooled covariance.

    `ridge` scales the average eigenvalue added to the diagonal; covariances
    that stay singular raise DegenerateCovariance.
    """

    ridge: float = 1e-6

    def __post_init__(self):
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass(frozen=True)
class Qda:
    """Quadratic discriminant analysis with per-class covariances."""

    ridge: float = 1e-6

    def __post_init__(self):
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


@dataclass(frozen=True)
class SvmRbf:
    """RBF-kernel soft-margin SVM trained by pairwise dual coordinate ascent.

    `gamma="auto"` resolves to 1/d at fit time. `max_passes` caps the number
    of pair updates (default 10n); hitting it returns the best iterate with
    `converged=False` instead of failing. Multi-class is one-vs-rest.
    """

    cost: float = 1.0
    gamma: float | str = "auto"
    tol: float = 1e-3
    max_passes: int | None = None

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError("cost must be positive")
        if self.gamma != "auto" and not self.gamma > 0:
            raise ValueError('gamma must be positive or "auto"')
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_passes is not None and self.max_passes < 1:
            raise ValueError("max_passes must be positive")


@dataclass(frozen=True)
class LogRegL1:
    """L1-regularized logistic regression fit by coordinate descent.

    `lam="cv"` selects the penalty by stratified cross-validation on the
    training set over `lambda_grid` (default: 20 log-spaced points from the
    smallest all-zero-weight lambda down to 1e-4 of it). The intercept is
    never penalized. Multi-class is one-vs-rest with a shared lambda.
    """

    lam: float | str = "cv"
    lambda_grid: tuple[float, ...] | None = None
    inner_folds: int = 5
    max_iter: int = 1000
    tol: float = 1e-7
    cv_seed: int = 0

    def __post_init__(self):
        if self.lam != "cv" and not self.lam > 0:
            raise ValueError('lam must be positive or "cv"')
        if self.lambda_grid is not None:
            grid = tuple(float(g) for g in self.lambda_grid)
            if not grid or any(g <= 0 for g in grid):
                raise ValueError("lambda_grid must be positive values")
            if any(a <= b for a, b in zip(grid, grid[1:])):
                raise ValueError("lambda_grid must be sorted descending")
            object.__setattr__(self, "lambda_grid", grid)
        if self.inner_folds < 2:
            raise ValueError("inner_folds must be at least 2")
        if self.max_iter < 1 or self.tol <= 0:
            raise ValueError("max_iter and tol must be positive")


ClassifierSpec = Knn | Lda | Qda | SvmRbf | LogRegL1


@dataclass(frozen=True)
class RiskEstimate:
    """Exact misclassified fraction over an evaluation set."""

    rate: float
    n_evaluated: int

    @classmethod
    def from_counts(cls, n_errors: int, n_evaluated: int) -> "RiskEstimate":
        if n_evaluated < 1:
            raise ValueError("cannot evaluate risk on an empty set")
        return cls(rate=n_errors / n_evaluated, n_evaluated=n_evaluated)


def fit_arrays(spec, X: np.ndarray, y: np.ndarray, n_classes: int):
    """Fit on raw arrays; the fast path used by search evaluators."""
    from . import gaussian, knn, logistic, svm

    if isinstance(spec, Knn):
        return knn.fit_knn(spec, X, y, n_classes)
    if isinstance(spec, Lda):
        return gaussian.fit_lda(spec, X, y, n_classes)
    if isinstance(spec, Qda):
        return gaussian.fit_qda(spec, X, y, n_classes)
    if isinstance(spec, SvmRbf):
        return svm.fit_svm(spec, X, y, n_classes)
    if isinstance(spec, LogRegL1):
        return logistic.fit_logreg(spec, X, y, n_classes)
    raise TypeError(f"unknown classifier spec: {spec!r}")


def fit(spec, train: LabeledDataset):
    """Fit `spec` on a dataset, returning an immutable trained model."""
    return fit_arrays(spec, train.features, train.labels, train.n_classes)


def _check_matrix(model, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(
            f"dimension mismatch: model expects {model.n_features} features"
        )
    if not np.isfinite(X).all():
        raise ValueError("inputs must be finite")
    return X


def predict(model, x):
    """Predict the class of one d-vector (or of each row of a 2-D array)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        if x.shape[0] != model.n_features:
            raise ValueError(
                f"dimension mismatch: model expects {model.n_features} features"
            )
        if not np.isfinite(x).all():
            raise ValueError("inputs must be finite")
        return int(model.predict_batch(x[None, :])[0])
    return model.predict_batch(_check_matrix(model, x))


def misclassification_rate(model, eval_ds: LabeledDataset) -> RiskEstimate:
    """Exact fraction of `eval_ds` rows the model mislabels."""
    if eval_ds.p != model.n_features:
        raise ValueError(
            f"dimension mismatch: model expects {model.n_features} features, "
            f"dataset has {eval_ds.p}"
        )
    preds = model.predict_batch(eval_ds.features)
    n_err = int(np.count_nonzero(preds != eval_ds.labels))
    return RiskEstimate.from_counts(n_err, eval_ds.n)


def require_all_classes(y: np.ndarray, n_classes: int) -> np.ndarray:
    """Class counts, failing with FitError if any class is absent."""
    counts = np.bincount(y, minlength=n_classes)
    if (counts == 0).any():
        missing = int(np.flatnonzero(counts == 0)[0])
        raise FitError(f"class {missing} absent from training data")
    return counts
