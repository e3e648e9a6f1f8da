"""Dataset containers, CSV ingestion, subset projection, and fold construction."""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream

__all__ = [
    "LabeledDataset",
    "FeatureSubset",
    "FoldAssignment",
    "load_csv",
    "save_csv",
    "project",
    "stratified_kfold",
    "split_holdout",
]


@dataclass(frozen=True)
class FeatureSubset:
    """An ordered set of distinct column indices, kept sorted ascending.

    The canonical sorted form makes set equality plain tuple equality, and
    tuples of subsets sort lexicographically, which is the tie-break order
    used throughout the search module.
    """

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        object.__setattr__(self, "indices", idx)
        if len(idx) == 0:
            raise ValueError("feature subset must contain at least one index")
        if any(i < 0 for i in idx):
            raise ValueError("feature indices must be nonnegative")
        if any(a >= b for a, b in zip(idx, idx[1:])):
            raise ValueError("feature indices must be distinct and ascending")

    @classmethod
    def of(cls, indices) -> "FeatureSubset":
        """Build a subset from any iterable of indices, sorting first."""
        return cls(tuple(sorted(int(i) for i in indices)))

    @property
    def size(self) -> int:
        return len(self.indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=np.intp)


def _lock(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class LabeledDataset:
    """An n x p real feature matrix with integer class labels in {0..C-1}.

    `n_classes` may be passed explicitly when taking row subsets so that a
    fold that happens to miss a class still reports the parent's class count;
    top-level constructors (CSV ingestion, simulation generators) always
    produce datasets where every class occurs.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = None
    n_classes: int | None = None

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True, order="C")
        y = np.array(self.labels, dtype=np.int64, copy=True)
        if X.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("labels length must equal the feature row count")
        if X.shape[0] == 0 or X.shape[1] == 0:
            raise ValueError("dataset must have at least one row and one column")
        if not np.isfinite(X).all():
            raise ValueError("non-finite feature value")
        if y.min() < 0:
            raise ValueError("labels must be nonnegative class indices")
        if self.n_classes is None:
            C = int(y.max()) + 1
            counts = np.bincount(y, minlength=C)
            if C < 2:
                raise ValueError("dataset must contain at least two classes")
            if (counts == 0).any():
                missing = int(np.flatnonzero(counts == 0)[0])
                raise ValueError(f"class {missing} has no samples")
            object.__setattr__(self, "n_classes", C)
        else:
            if self.n_classes < 2:
                raise ValueError("n_classes must be at least 2")
            if int(y.max()) >= self.n_classes:
                raise ValueError("label outside {0..C-1}")
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != X.shape[1]:
                raise ValueError("feature_names length must equal column count")
            object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "features", _lock(X))
        object.__setattr__(self, "labels", _lock(y))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.n_classes)

    def take_rows(self, rows) -> "LabeledDataset":
        """Row subset preserving the class count and column order."""
        rows = np.asarray(rows, dtype=np.intp)
        return LabeledDataset(
            self.features[rows],
            self.labels[rows],
            feature_names=self.feature_names,
            n_classes=self.n_classes,
        )


@dataclass(frozen=True)
class FoldAssignment:
    """Assignment of each sample to one of K folds."""

    fold_of: np.ndarray
    n_folds: int

    def __post_init__(self):
        f = np.array(self.fold_of, dtype=np.int64, copy=True)
        if f.ndim != 1:
            raise ValueError("fold_of must be 1-D")
        if self.n_folds < 2:
            raise ValueError("need at least two folds")
        if f.size and (f.min() < 0 or f.max() >= self.n_folds):
            raise ValueError("fold id out of range")
        object.__setattr__(self, "fold_of", _lock(f))

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def project(ds: LabeledDataset, subset: FeatureSubset) -> LabeledDataset:
    """Dataset restricted to the subset's columns, in ascending-index order."""
    idx = subset.as_array()
    if idx[-1] >= ds.p:
        raise IndexError(
            f"feature index {int(idx[-1])} out of range for p={ds.p}"
        )
    names = None
    if ds.feature_names is not None:
        names = tuple(ds.feature_names[i] for i in idx)
    return LabeledDataset(
        ds.features[:, idx], ds.labels, feature_names=names, n_classes=ds.n_classes
    )


def _parse_label_cells(cells: list[str]) -> np.ndarray:
    """Integer labels pass through; anything else maps by first appearance."""
    try:
        vals = [int(c) for c in cells]
    except ValueError:
        vals = None
    if vals is not None:
        labels = np.asarray(vals, dtype=np.int64)
        if labels.min() < 0:
            raise ValueError("integer labels must be nonnegative")
        counts = np.bincount(labels, minlength=int(labels.max()) + 1)
        if (counts == 0).any():
            missing = int(np.flatnonzero(counts == 0)[0])
            raise ValueError(
                f"integer labels must cover 0..C-1; class {missing} is missing"
            )
        return labels
    mapping: dict[str, int] = {}
    out = np.empty(len(cells), dtype=np.int64)
    for i, c in enumerate(cells):
        if c not in mapping:
            mapping[c] = len(mapping)
        out[i] = mapping[c]
    return out


def load_csv(path, label_column, has_header: bool = True) -> LabeledDataset:
    """Read a comma-separated file into a LabeledDataset.

    The label column is named (requires a header) or given as a 0-based
    index. Integer labels are used as class ids directly and must cover
    0..C-1; string labels are mapped to 0..C-1 in first-appearance order.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise ValueError("empty CSV file")
    header = None
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise ValueError("CSV has a header but no data rows")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(f"ragged row {i}: {len(row)} cells, expected {width}")
    if isinstance(label_column, str):
        if header is None:
            raise ValueError("label column given by name but file has no header")
        if label_column not in header:
            raise ValueError(f"label column {label_column!r} not in header")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not 0 <= label_idx < width:
            raise ValueError(f"label column index {label_idx} out of range")
    label_cells = [row[label_idx].strip() for row in rows]
    labels = _parse_label_cells(label_cells)
    if int(labels.max()) == 0:
        raise ValueError("single-class label column")
    feat_cols = [j for j in range(width) if j != label_idx]
    X = np.empty((len(rows), len(feat_cols)))
    for i, row in enumerate(rows):
        for k, j in enumerate(feat_cols):
            cell = row[j].strip()
            try:
                X[i, k] = float(cell)
            except ValueError:
                raise ValueError(
                    f"non-numeric feature cell {cell!r} at row {i}, column {j}"
                ) from None
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature value")
    names = None
    if header is not None:
        names = tuple(header[j] for j in feat_cols)
    return LabeledDataset(X, labels, feature_names=names)


def save_csv(ds: LabeledDataset, path, label_name: str = "label") -> None:
    """Write a dataset back to CSV; floats round-trip at 17 significant digits."""
    names = ds.feature_names or tuple(f"feature_{j}" for j in range(ds.p))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(names) + [label_name])
        for i in range(ds.n):
            row = [format(v, ".17g") for v in ds.features[i]]
            row.append(str(int(ds.labels[i])))
            writer.writerow(row)


def stratified_kfold(ds: LabeledDataset, K: int, seed: int) -> FoldAssignment:
    """Seeded stratified K-fold assignment.

    Within each class the samples are shuffled, then dealt to folds by a
    round-robin cursor that carries over from class to class, so per-class
    and overall fold sizes both differ by at most one. Classes smaller than
    K land in distinct folds until exhausted.
    """
    if K < 2:
        raise ValueError("K must be at least 2")
    if K > ds.n:
        raise ValueError(f"K={K} exceeds the sample count n={ds.n}")
    fold_of = np.empty(ds.n, dtype=np.int64)
    cursor = 0
    for c in range(ds.n_classes):
        pos = np.flatnonzero(ds.labels == c)
        perm = RandomStream((int(seed), K, c)).permutation(pos.size)
        fold_of[pos[perm]] = (cursor + np.arange(pos.size)) % K
        cursor = (cursor + pos.size) % K
    return FoldAssignment(fold_of, K)


def holdout_rows(ds: LabeledDataset, fraction: float, seed: int):
    """Row indices of a stratified (kept, held-out) split; see split_holdout."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie strictly between 0 and 1")
    held: list[np.ndarray] = []
    kept: list[np.ndarray] = []
    for c in range(ds.n_classes):
        pos = np.flatnonzero(ds.labels == c)
        n_c = pos.size
        n_held = int(np.floor(fraction * n_c + 0.5))
        if n_held < 1 or n_held > n_c - 1:
            raise ValueError(
                f"fraction {fraction} leaves class {c} empty in one part"
            )
        perm = RandomStream((int(seed), 2, c)).permutation(n_c)
        held.append(pos[perm[:n_held]])
        kept.append(pos[perm[n_held:]])
    return np.sort(np.concatenate(kept)), np.sort(np.concatenate(held))


def split_holdout(ds: LabeledDataset, fraction: float, seed: int):
    """Stratified split into (fit_part, held_out_part).

    `fraction` is the share of each class routed to the held-out part;
    both parts must keep at least one sample of every class.
    """
    kept_rows, held_rows = holdout_rows(ds, fraction, seed)
    return ds.take_rows(kept_rows), ds.take_rows(held_rows)
