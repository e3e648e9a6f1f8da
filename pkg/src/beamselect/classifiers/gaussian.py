"""Linear and quadratic discriminant analysis via Cholesky factorizations."""

from __future__ import annotations

import numpy as np

from .base import DegenerateCovariance, Lda, Qda, require_all_classes

_LOG_2PI = float(np.log(2.0 * np.pi))


def _ridged(cov: np.ndarray, ridge: float) -> np.ndarray:
    d = cov.shape[0]
    if ridge > 0.0:
        cov = cov + (ridge * np.trace(cov) / d) * np.eye(d)
    return cov


def _factor(cov: np.ndarray, what: str):
    """Cholesky factor, its log-determinant, and the implied precision."""
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        raise DegenerateCovariance(f"{what} covariance is singular even after ridge") from None
    diag = np.diag(L)
    if not (diag > 0).all() or not np.isfinite(diag).all():
        raise DegenerateCovariance(f"{what} covariance is singular even after ridge")
    logdet = 2.0 * float(np.log(diag).sum())
    Linv = np.linalg.inv(L)
    precision = Linv.T @ Linv
    return L, logdet, (precision + precision.T) / 2.0


class GaussianModel:
    """Shared predictor for LDA (pooled) and QDA (per-class) Gaussians."""

    def __init__(self, means, precisions, logdets, log_priors):
        self.means = means
        self.precisions = precisions  # one matrix (LDA) repeated or per class
        self.logdets = logdets
        self.log_priors = log_priors
        self.n_classes, self.n_features = means.shape
        self.converged = True

    def log_discriminants(self, X) -> np.ndarray:
        """log N(x; mu_c, Sigma_c) + log pi_c for every row and class."""
        m = X.shape[0]
        out = np.empty((m, self.n_classes))
        for c in range(self.n_classes):
            diff = X - self.means[c]
            t = diff @ self.precisions[c]
            quad = np.einsum("ij,ij->i", t, diff)
            out[:, c] = self.log_priors[c] - 0.5 * (
                self.n_features * _LOG_2PI + self.logdets[c] + quad
            )
        return out

    def predict_batch(self, X) -> np.ndarray:
        return np.argmax(self.log_discriminants(X), axis=1)


def _class_stats(X, y, n_classes):
    counts = require_all_classes(y, n_classes)
    d = X.shape[1]
    means = np.empty((n_classes, d))
    scatters = []
    for c in range(n_classes):
        Xc = X[y == c]
        means[c] = Xc.mean(axis=0)
        centered = Xc - means[c]
        scatters.append(centered.T @ centered)
    return counts, means, scatters


def fit_lda(spec: Lda, X, y, n_classes) -> GaussianModel:
    n, d = X.shape
    counts, means, scatters = _class_stats(X, y, n_classes)
    pooled = sum(scatters) / max(n - n_classes, 1)
    _, logdet, precision = _factor(_ridged(pooled, spec.ridge), "pooled")
    log_priors = np.log(counts / n)
    return GaussianModel(
        means,
        [precision] * n_classes,
        np.full(n_classes, logdet),
        log_priors,
    )


def fit_qda(spec: Qda, X, y, n_classes) -> GaussianModel:
    n, d = X.shape
    counts, means, scatters = _class_stats(X, y, n_classes)
    small = np.flatnonzero(counts < 2)
    if small.size:
        raise DegenerateCovariance(
            f"class {int(small[0])} has fewer than 2 samples; cannot estimate a covariance"
        )
    precisions, logdets = [], np.empty(n_classes)
    for c in range(n_classes):
        cov = _ridged(scatters[c] / (counts[c] - 1), spec.ridge)
        _, logdets[c], precision = _factor(cov, f"class {c}")
        precisions.append(precision)
    return GaussianModel(means, precisions, logdets, np.log(counts / n))
