"""L1-penalized logistic regression via coordinate descent on IRLS surrogates.

The objective for a binary machine with targets t in {0,1} is

    (1/n) sum_i log(1 + exp(-s_i (x_i.w + b))) + lam * |w|_1,   s_i = 2t_i - 1,

with an unpenalized intercept. Each outer step builds the usual weighted
quadratic model at the current point and solves it by cyclic soft-threshold
coordinate descent; the outer loop stops only when the max coordinate change
and the exact subgradient stationarity residual both drop below `tol`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..data import LabeledDataset, stratified_kfold
from .base import FitError, LogRegL1, require_all_classes

__all__ = ["fit_logreg", "cv_select_lambda", "lambda_grid_for", "LogisticModel"]

GRID_POINTS = 20
GRID_DECADES = 4.0


@njit(cache=True, nogil=True)
def _fit_one_lambda(XF, t, lam, w, b_box, f, max_cycles, tol):
    """Warm-start fit at one lambda; mutates w, b_box, f. Returns (cycles, ok)."""
    n, d = XF.shape
    total = 0
    for _outer in range(1000):
        sig = np.empty(n)
        for i in range(n):
            z = f[i]
            if z >= 0.0:
                sig[i] = 1.0 / (1.0 + np.exp(-z))
            else:
                e = np.exp(z)
                sig[i] = e / (1.0 + e)
        # exact stationarity residual at the current point
        gb = 0.0
        for i in range(n):
            gb += sig[i] - t[i]
        gb /= n
        res = abs(gb)
        for j in range(d):
            g = 0.0
            for i in range(n):
                g += XF[i, j] * (sig[i] - t[i])
            g /= n
            if w[j] > 0.0:
                r = abs(g + lam)
            elif w[j] < 0.0:
                r = abs(g - lam)
            else:
                r = abs(g) - lam
                if r < 0.0:
                    r = 0.0
            if r > res:
                res = r
        if res <= tol:
            return total, True
        if total >= max_cycles:
            return total, False
        # weighted quadratic model around the current point
        omega = np.empty(n)
        resid = np.empty(n)  # omega * (working response - current fit)
        for i in range(n):
            om = sig[i] * (1.0 - sig[i])
            if om < 1e-6:
                om = 1e-6
            omega[i] = om
            resid[i] = t[i] - sig[i]
        hcol = np.empty(d)
        for j in range(d):
            h = 0.0
            for i in range(n):
                h += omega[i] * XF[i, j] * XF[i, j]
            hcol[j] = h / n
        homega = 0.0
        for i in range(n):
            homega += omega[i]
        homega /= n
        for _cycle in range(1000):
            total += 1
            step = 0.0
            gb2 = 0.0
            for i in range(n):
                gb2 -= resid[i]
            gb2 /= n
            db = -gb2 / homega
            if db != 0.0:
                b_box[0] += db
                for i in range(n):
                    resid[i] -= omega[i] * db
            if abs(db) > step:
                step = abs(db)
            for j in range(d):
                if hcol[j] <= 0.0:
                    continue
                gj = 0.0
                for i in range(n):
                    gj -= XF[i, j] * resid[i]
                gj /= n
                u = hcol[j] * w[j] - gj
                if u > lam:
                    wnew = (u - lam) / hcol[j]
                elif u < -lam:
                    wnew = (u + lam) / hcol[j]
                else:
                    wnew = 0.0
                dw = wnew - w[j]
                if dw != 0.0:
                    w[j] = wnew
                    for i in range(n):
                        resid[i] -= omega[i] * XF[i, j] * dw
                if abs(dw) > step:
                    step = abs(dw)
            if step <= tol or total >= max_cycles:
                break
        # refresh the linear predictor exactly
        for i in range(n):
            acc = b_box[0]
            for j in range(d):
                if w[j] != 0.0:
                    acc += XF[i, j] * w[j]
            f[i] = acc
    return total, False


@njit(cache=True, nogil=True)
def _fit_path(XF, t, lambdas, max_cycles, tol):
    """Warm-started fits along a descending lambda path."""
    n, d = XF.shape
    nl = lambdas.shape[0]
    W = np.zeros((nl, d))
    B = np.zeros(nl)
    OK = np.zeros(nl, dtype=np.bool_)
    pbar = 0.0
    for i in range(n):
        pbar += t[i]
    pbar /= n
    b_box = np.empty(1)
    b_box[0] = np.log(pbar / (1.0 - pbar))
    w = np.zeros(d)
    f = np.full(n, b_box[0])
    for li in range(nl):
        _, ok = _fit_one_lambda(XF, t, lambdas[li], w, b_box, f, max_cycles, tol)
        W[li] = w
        B[li] = b_box[0]
        OK[li] = ok
    return W, B, OK


def _as_fortran(X) -> np.ndarray:
    return np.asfortranarray(X, dtype=np.float64)


def lambda_max(X, t) -> float:
    """Smallest penalty at which every weight is zero (intercept-only fit)."""
    n = X.shape[0]
    pbar = t.mean()
    g = X.T @ (pbar - t) / n
    return float(np.max(np.abs(g)))


def lambda_grid_for(X, targets_list) -> np.ndarray:
    """Default descending grid shared by all one-vs-rest machines."""
    lmax = max(lambda_max(X, t) for t in targets_list)
    lmax = max(lmax, 1e-12)
    return lmax * np.logspace(0.0, -GRID_DECADES, GRID_POINTS)


class LogisticModel:
    def __init__(self, W, B, n_classes, lam, converged):
        self.W = W  # (n_machines, d)
        self.B = B
        self.n_classes = n_classes
        self.n_features = W.shape[1]
        self.lam = lam
        self.converged = converged

    def decision_values(self, X) -> np.ndarray:
        raw = X @ self.W.T + self.B
        if self.n_classes == 2:
            return np.column_stack([-raw[:, 0], raw[:, 0]])
        return raw

    def predict_batch(self, X) -> np.ndarray:
        return np.argmax(self.decision_values(X), axis=1)

    def nonzero_weights(self) -> int:
        return int(np.count_nonzero(self.W))


def _machine_targets(y, n_classes):
    if n_classes == 2:
        return [(y == 1).astype(np.float64)]
    return [(y == c).astype(np.float64) for c in range(n_classes)]


def path_cv_errors(X, y, n_classes, grid, splits, max_iter, tol):
    """Total misclassification count per grid lambda over fit/eval splits."""
    errors = np.zeros(len(grid), dtype=np.int64)
    grid_arr = np.asarray(grid, dtype=np.float64)
    for fold, (tr, te) in enumerate(splits):
        ytr = y[tr]
        counts = np.bincount(ytr, minlength=n_classes)
        if (counts == 0).any():
            missing = int(np.flatnonzero(counts == 0)[0])
            raise FitError(f"class {missing} absent from training fold {fold}")
        XF = _as_fortran(X[tr])
        Xte = X[te]
        yte = y[te]
        decisions = np.zeros((len(grid), te.size, n_classes))
        targets = _machine_targets(ytr, n_classes)
        for mi, t in enumerate(targets):
            W, B, _ = _fit_path(XF, t, grid_arr, max_iter, tol)
            vals = Xte @ W.T + B  # (n_te, n_lambda)
            if n_classes == 2:
                decisions[:, :, 0] = -vals.T
                decisions[:, :, 1] = vals.T
            else:
                decisions[:, :, mi] = vals.T
        preds = np.argmax(decisions, axis=2)
        errors += (preds != yte).sum(axis=1)
    return errors


def _cv_errors_for_grid(X, y, n_classes, grid, folds, seed, max_iter, tol):
    """Per-lambda CV errors with folds drawn by stratified_kfold."""
    ds = LabeledDataset(X, y, n_classes=n_classes)
    assign = stratified_kfold(ds, folds, seed)
    splits = [(assign.train_rows(f), assign.test_rows(f)) for f in range(folds)]
    return path_cv_errors(X, y, n_classes, grid, splits, max_iter, tol)


def cv_select_lambda(train: LabeledDataset, grid, folds: int, seed: int) -> float:
    """Grid value minimizing mean CV misclassification; ties pick the larger
    (sparser) lambda. The grid must be sorted descending."""
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("lambda grid must be non-empty")
    if any(a <= b for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be sorted descending")
    if folds < 2:
        raise ValueError("folds must be at least 2")
    errors = _cv_errors_for_grid(
        train.features,
        train.labels,
        train.n_classes,
        grid,
        folds,
        seed,
        max_iter=1000,
        tol=1e-7,
    )
    return grid[int(np.argmin(errors))]


def fit_logreg(spec: LogRegL1, X, y, n_classes) -> LogisticModel:
    counts = require_all_classes(y, n_classes)
    X = np.asarray(X, dtype=np.float64)
    targets = _machine_targets(y, n_classes)
    if spec.lambda_grid is not None:
        grid = np.asarray(spec.lambda_grid, dtype=np.float64)
    else:
        grid = lambda_grid_for(X, targets)
    if spec.lam == "cv":
        if (counts < spec.inner_folds).any():
            small = int(np.flatnonzero(counts < spec.inner_folds)[0])
            raise FitError(
                f"class {small} has fewer than inner_folds={spec.inner_folds} samples"
            )
        errors = _cv_errors_for_grid(
            X, y, n_classes, list(grid), spec.inner_folds, spec.cv_seed,
            spec.max_iter, spec.tol,
        )
        lam = float(grid[int(np.argmin(errors))])
    else:
        lam = float(spec.lam)
    # warm a path down to the chosen lambda for a good starting point
    path = grid[grid > lam]
    lambdas = np.append(path, lam)
    XF = _as_fortran(X)
    W = np.empty((len(targets), X.shape[1]))
    B = np.empty(len(targets))
    converged = True
    for mi, t in enumerate(targets):
        Wp, Bp, OK = _fit_path(XF, t, lambdas, spec.max_iter, spec.tol)
        W[mi] = Wp[-1]
        B[mi] = Bp[-1]
        converged = converged and bool(OK[-1])
    return LogisticModel(W, B, n_classes, lam, converged)
