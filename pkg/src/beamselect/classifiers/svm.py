"""Soft-margin RBF SVM trained by pairwise dual coordinate ascent.

The dual is optimized with a maximal-violating-pair working-set strategy
(second-order pair selection), which is SMO with a deterministic pair choice:
ties always resolve to the smallest index, so training is reproducible.
Stopping uses the duality-gap style criterion m(alpha) - M(alpha) <= tol.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .base import SvmRbf, require_all_classes

__all__ = ["fit_svm", "SvmModel", "rbf_kernel"]

_NEG_INF = -1e300


def rbf_kernel(A, B, gamma: float) -> np.ndarray:
    """exp(-gamma * ||a - b||^2) for all pairs of rows."""
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    d = sq_a[:, None] + sq_b[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return np.exp(-gamma * d)


@njit(cache=True, nogil=True)
def _smo(K, y, cost, tol, max_iter):
    """Solve the binary dual; returns (alpha, b, iterations, converged).

    K is symmetric, so every kernel access goes through contiguous rows.
    """
    n = K.shape[0]
    alpha = np.zeros(n)
    E = -y.copy()  # E_i = f_i - y_i with f = 0 at the start
    diag = np.empty(n)
    for t in range(n):
        diag[t] = K[t, t]
    it = 0
    converged = False
    b = 0.0
    # m = max over I_up of -E (attained at i), M = min over I_low of -E;
    # refreshed inside the E-update loop to save one scan per iteration
    need_scan = True
    m_val = _NEG_INF
    M_val = -_NEG_INF
    i = -1
    while it < max_iter:
        if need_scan:
            m_val = _NEG_INF
            i = -1
            M_val = -_NEG_INF
            for t in range(n):
                at = alpha[t]
                if y[t] > 0.0:
                    up = at < cost
                    low = at > 0.0
                else:
                    up = at > 0.0
                    low = at < cost
                if up and -E[t] > m_val:
                    m_val = -E[t]
                    i = t
                if low and -E[t] < M_val:
                    M_val = -E[t]
            need_scan = False
        if i < 0 or m_val - M_val <= tol:
            converged = True
            break
        # second-order choice of the partner index
        Ki = K[i]
        j = -1
        best_gain = 0.0
        Kii = diag[i]
        for t in range(n):
            at = alpha[t]
            if y[t] > 0.0:
                low = at > 0.0
            else:
                low = at < cost
            if not low:
                continue
            diff = m_val + E[t]  # = (-E_i) - (-E_t) > 0 for violating partners
            if diff <= 0.0:
                continue
            curv = Kii + diag[t] - 2.0 * Ki[t]
            if curv <= 1e-12:
                curv = 1e-12
            gain = diff * diff / curv
            if gain > best_gain:
                best_gain = gain
                j = t
        if j < 0:
            converged = True
            break
        Kj = K[j]
        yi = y[i]
        yj = y[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        s = yi * yj
        if s < 0.0:
            L = max(0.0, aj_old - ai_old)
            H = min(cost, cost + aj_old - ai_old)
        else:
            L = max(0.0, ai_old + aj_old - cost)
            H = min(cost, ai_old + aj_old)
        if L >= H:
            it += 1
            need_scan = True
            continue
        eta = 2.0 * Ki[j] - Kii - diag[j]
        if eta >= -1e-12:
            eta = -1e-12
        aj = aj_old - yj * (E[i] - E[j]) / eta
        if aj < L:
            aj = L
        elif aj > H:
            aj = H
        # snap to exact bounds so rounding never strands a variable a few
        # ulps inside the box, where it would be reselected forever
        snap = 1e-11 * cost
        if aj < snap:
            aj = 0.0
        elif aj > cost - snap:
            aj = cost
        dj = aj - aj_old
        if abs(dj) < 1e-13 * cost:
            it += 1
            need_scan = True
            continue
        ai = ai_old + s * (aj_old - aj)
        if ai < snap:
            ai = 0.0
        elif ai > cost - snap:
            ai = cost
        alpha[i] = ai
        alpha[j] = aj
        di = ai - ai_old
        cdi = yi * di
        cdj = yj * dj
        m_val = _NEG_INF
        i = -1
        M_val = -_NEG_INF
        for t in range(n):
            Et = E[t] + cdi * Ki[t] + cdj * Kj[t]
            E[t] = Et
            at = alpha[t]
            if y[t] > 0.0:
                up = at < cost
                low = at > 0.0
            else:
                up = at > 0.0
                low = at < cost
            if up and -Et > m_val:
                m_val = -Et
                i = t
            if low and -Et < M_val:
                M_val = -Et
        it += 1
    # intercept from the feasible KKT interval; free vectors pin it exactly
    lo = _NEG_INF
    hi = -_NEG_INF
    free_sum = 0.0
    free_count = 0
    for t in range(n):
        up = (y[t] > 0.0 and alpha[t] < cost) or (y[t] < 0.0 and alpha[t] > 0.0)
        low = (y[t] > 0.0 and alpha[t] > 0.0) or (y[t] < 0.0 and alpha[t] < cost)
        if up and -E[t] > lo:
            lo = -E[t]
        if low and -E[t] < hi:
            hi = -E[t]
        if 0.0 < alpha[t] < cost:
            free_sum += -E[t]
            free_count += 1
    if free_count > 0:
        b = free_sum / free_count
    elif lo > _NEG_INF and hi < -_NEG_INF:
        b = (lo + hi) / 2.0
    else:
        b = 0.0
    return alpha, b, it, converged


class _BinaryMachine:
    def __init__(self, sv_X, sv_coef, b, gamma, converged):
        self.sv_X = sv_X
        self.sv_coef = sv_coef
        self.b = b
        self.gamma = gamma
        self.converged = converged

    def decision(self, X) -> np.ndarray:
        if self.sv_X.shape[0] == 0:
            return np.full(X.shape[0], self.b)
        return rbf_kernel(X, self.sv_X, self.gamma) @ self.sv_coef + self.b


class SvmModel:
    def __init__(self, machines, n_classes, n_features, gamma):
        self.machines = machines
        self.n_classes = n_classes
        self.n_features = n_features
        self.gamma = gamma
        self.converged = all(mach.converged for mach in machines)

    def decision_values(self, X) -> np.ndarray:
        if self.n_classes == 2:
            f = self.machines[0].decision(X)
            return np.column_stack([-f, f])
        return np.column_stack([mach.decision(X) for mach in self.machines])

    def predict_batch(self, X) -> np.ndarray:
        return np.argmax(self.decision_values(X), axis=1)


def _train_binary(K, X, targets, cost, gamma, tol, max_iter) -> _BinaryMachine:
    yv = np.where(targets, 1.0, -1.0)
    alpha, b, _, converged = _smo(K, yv, cost, tol, max_iter)
    keep = alpha > 1e-12
    return _BinaryMachine(X[keep], (alpha * yv)[keep], b, gamma, converged)


def fit_svm(spec: SvmRbf, X, y, n_classes) -> SvmModel:
    require_all_classes(y, n_classes)
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    gamma = 1.0 / d if spec.gamma == "auto" else float(spec.gamma)
    max_iter = spec.max_passes if spec.max_passes is not None else 10 * n
    K = rbf_kernel(X, X, gamma)
    if n_classes == 2:
        machines = [_train_binary(K, X, y == 1, spec.cost, gamma, spec.tol, max_iter)]
    else:
        machines = [
            _train_binary(K, X, y == c, spec.cost, gamma, spec.tol, max_iter)
            for c in range(n_classes)
        ]
    return SvmModel(machines, n_classes, d, gamma)


def _fold_blocks(Kp, s, e):
    """Train/eval kernel blocks for the fold occupying rows [s, e).

    All pieces are contiguous slices of the fold-ordered kernel, so the
    assembly is a handful of memcpys instead of large gathers.
    """
    n = Kp.shape[0]
    n_eval = e - s
    n_train = n - n_eval
    Ktr = np.empty((n_train, n_train))
    Ktr[:s, :s] = Kp[:s, :s]
    Ktr[:s, s:] = Kp[:s, e:]
    Ktr[s:, :s] = Kp[e:, :s]
    Ktr[s:, s:] = Kp[e:, e:]
    Kte = np.empty((n_eval, n_train))
    Kte[:, :s] = Kp[s:e, :s]
    Kte[:, s:] = Kp[s:e, e:]
    return Ktr, Kte


def _fold_error_count(Ktr, Kte, ytr, yte, spec, n_classes):
    max_iter = spec.max_passes if spec.max_passes is not None else 10 * ytr.size
    if n_classes == 2:
        yv = np.where(ytr == 1, 1.0, -1.0)
        alpha, b, _, _ = _smo(Ktr, yv, spec.cost, spec.tol, max_iter)
        preds = (Kte @ (alpha * yv) + b > 0).astype(np.int64)
    else:
        dec = np.empty((yte.size, n_classes))
        for c in range(n_classes):
            yv = np.where(ytr == c, 1.0, -1.0)
            alpha, b, _, _ = _smo(Ktr, yv, spec.cost, spec.tol, max_iter)
            dec[:, c] = Kte @ (alpha * yv) + b
        preds = np.argmax(dec, axis=1)
    return int(np.count_nonzero(preds != yte))


def cv_error_svm(spec: SvmRbf, Xsub, y, n_classes, splits):
    """Pooled (errors, evaluated) over fit/eval splits; fast scorer path.

    One kernel matrix is built per candidate subset. When the eval rows
    partition the data (inner CV), rows are reordered fold-contiguously so
    every per-fold sub-kernel is sliced, not gathered.
    """
    from .knn import fold_layout

    Xsub = np.ascontiguousarray(Xsub, dtype=np.float64)
    n, d = Xsub.shape
    gamma = 1.0 / d if spec.gamma == "auto" else float(spec.gamma)
    layout = fold_layout(splits, n)
    if layout is not None:
        order, starts, ends = layout
        for fit_rows, _ in splits:
            require_all_classes(y[fit_rows], n_classes)
        yp = y[order]
        Kp = rbf_kernel(Xsub[order], Xsub[order], gamma)
        errors = 0
        for f in range(starts.size):
            s, e = int(starts[f]), int(ends[f])
            Ktr, Kte = _fold_blocks(Kp, s, e)
            ytr = np.concatenate([yp[:s], yp[e:]])
            errors += _fold_error_count(Ktr, Kte, ytr, yp[s:e], spec, n_classes)
        return errors, n
    K = rbf_kernel(Xsub, Xsub, gamma)
    errors = 0
    total = 0
    for fit_rows, eval_rows in splits:
        ytr = y[fit_rows]
        require_all_classes(ytr, n_classes)
        Ktr = K[np.ix_(fit_rows, fit_rows)]
        Kte = K[np.ix_(eval_rows, fit_rows)]
        errors += _fold_error_count(Ktr, Kte, ytr, y[eval_rows], spec, n_classes)
        total += eval_rows.size
    return errors, total
