"""k-nearest-neighbor classification with exact distance-tie handling."""

from __future__ import annotations

import numpy as np
from numba import njit

from .base import Knn, require_all_classes

# cap on temporary (chunk x n_train x d) distance workspaces, in doubles
_CHUNK_BUDGET = 2_000_000


@njit(cache=True, nogil=True)
def _fold_errors(Xtr, ytr, Xte, yte, k, n_classes):
    """Misclassification count of a KNN fit/eval pair, all loops fused.

    Distances accumulate coordinate by coordinate exactly like the
    vectorized predictor, so both paths agree bit for bit.
    """
    n, d = Xtr.shape
    m = Xte.shape[0]
    kk = min(k, n)
    errors = 0
    dist = np.empty(n)
    votes = np.empty(n_classes)
    for a in range(m):
        for b in range(n):
            s = 0.0
            for c in range(d):
                diff = Xte[a, c] - Xtr[b, c]
                s += diff * diff
            dist[b] = s
        radius = np.partition(dist, kk - 1)[kk - 1]
        for c in range(n_classes):
            votes[c] = 0.0
        for b in range(n):
            if dist[b] <= radius:
                votes[ytr[b]] += 1.0
        best = 0
        for c in range(1, n_classes):
            if votes[c] > votes[best]:
                best = c
        if best != yte[a]:
            errors += 1
    return errors


class KnnModel:
    def __init__(self, X, y, n_classes, neighbors):
        self.X = X
        self.y = y
        self.n_classes = n_classes
        self.n_features = X.shape[1]
        self.k = min(neighbors, X.shape[0])
        self.converged = True
        # 0/1 matrix so votes come out of one exact float matmul
        self._onehot = np.equal.outer(y, np.arange(n_classes)).astype(np.float64)

    def predict_batch(self, X) -> np.ndarray:
        n_train, d = self.X.shape
        chunk = max(1, _CHUNK_BUDGET // (n_train * max(d, 1)))
        out = np.empty(X.shape[0], dtype=np.int64)
        for start in range(0, X.shape[0], chunk):
            block = X[start : start + chunk]
            # squared Euclidean distances, summed coordinate by coordinate so
            # the values match a plain left-to-right scalar accumulation
            diff = block[:, None, :] - self.X[None, :, :]
            dist = (diff * diff).sum(axis=2)
            kth = np.partition(dist, self.k - 1, axis=1)[:, self.k - 1]
            voters = dist <= kth[:, None]
            votes = voters @ self._onehot
            out[start : start + chunk] = np.argmax(votes, axis=1)
        return out


def fit_knn(spec: Knn, X, y, n_classes) -> KnnModel:
    # a class absent from training simply never gets votes, so unlike the
    # parametric models KNN accepts any non-empty training set
    return KnnModel(np.ascontiguousarray(X, dtype=np.float64), y, n_classes, spec.neighbors)


@njit(cache=True, nogil=True)
def _partition_cv_errors(Xp, yp, starts, ends, k, n_classes):
    """Pooled CV error over fold-contiguous rows; no per-fold copies.

    Rows are ordered so fold f occupies [starts[f], ends[f]); its training
    set is the complement, scanned as the two surrounding ranges.
    """
    n, d = Xp.shape
    errors = 0
    dist = np.empty(n)
    votes = np.empty(n_classes)
    for f in range(starts.shape[0]):
        s, e = starts[f], ends[f]
        n_train = n - (e - s)
        kk = min(k, n_train)
        for a in range(s, e):
            idx = 0
            for b in range(n):
                if s <= b < e:
                    continue
                acc = 0.0
                for c in range(d):
                    diff = Xp[a, c] - Xp[b, c]
                    acc += diff * diff
                dist[idx] = acc
                idx += 1
            radius = np.partition(dist[:n_train], kk - 1)[kk - 1]
            for c in range(n_classes):
                votes[c] = 0.0
            idx = 0
            for b in range(n):
                if s <= b < e:
                    continue
                if dist[idx] <= radius:
                    votes[yp[b]] += 1.0
                idx += 1
            best = 0
            for c in range(1, n_classes):
                if votes[c] > votes[best]:
                    best = c
            if best != yp[a]:
                errors += 1
    return errors


def fold_layout(splits, n):
    """(order, starts, ends) when the eval rows partition range(n), else None."""
    if len(splits) < 2:
        return None
    sizes = [te.size for _, te in splits]
    if sum(sizes) != n:
        return None
    order = np.concatenate([te for _, te in splits])
    starts = np.zeros(len(splits), dtype=np.int64)
    ends = np.cumsum(np.asarray(sizes, dtype=np.int64))
    starts[1:] = ends[:-1]
    return order, starts, ends


def cv_error_knn(spec: Knn, Xsub, y, n_classes, splits):
    """Pooled (errors, evaluated) over fit/eval splits; fast scorer path."""
    layout = fold_layout(splits, Xsub.shape[0])
    if layout is not None:
        order, starts, ends = layout
        for fit_rows, _ in splits:
            require_all_classes(y[fit_rows], n_classes)
        Xp = np.ascontiguousarray(Xsub[order])
        errors = int(
            _partition_cv_errors(Xp, y[order], starts, ends, spec.neighbors, n_classes)
        )
        return errors, Xsub.shape[0]
    errors = 0
    total = 0
    for fit_rows, eval_rows in splits:
        require_all_classes(y[fit_rows], n_classes)
        errors += int(
            _fold_errors(
                np.ascontiguousarray(Xsub[fit_rows]),
                y[fit_rows],
                np.ascontiguousarray(Xsub[eval_rows]),
                y[eval_rows],
                spec.neighbors,
                n_classes,
            )
        )
        total += eval_rows.size
    return errors, total
