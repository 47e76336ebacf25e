"""Labeled feature tables and the randomized operations studies need.

A :class:`Dataset` is an immutable ``(n, N)`` float matrix plus integer
labels in ``[0, class_count)``.  All randomized operations (label
permutation, row shuffling, fold assignment, null-group splitting,
synthetic generation) are pure functions of their inputs and a
:class:`~permsig.rng.PermutationPlan`, so rerunning with the same plan
reproduces the result bit for bit.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .rng import PermutationPlan


@dataclass(frozen=True)
class Dataset:
    """Immutable labeled dataset.

    Parameters
    ----------
    features : ndarray, shape (n, N)
        Finite float64 feature matrix.
    labels : ndarray, shape (n,)
        Integer class labels in ``[0, class_count)``.
    class_count : int
        Number of classes; 1 denotes an unlabeled one-condition set
        (all labels are then 0).
    feature_names : tuple of str, optional
        Column names; defaults to None.
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64, copy=True, order="C")
        labs = np.array(self.labels, dtype=np.int64, copy=True)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if labs.ndim != 1 or labs.shape[0] != feats.shape[0]:
            raise ValueError("labels must be 1-D with one entry per feature row")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features must be finite")
        if self.class_count < 1:
            raise ValueError("class_count must be at least 1")
        if labs.size and (labs.min() < 0 or labs.max() >= self.class_count):
            raise ValueError("every label must lie in [0, class_count)")
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != feats.shape[1]:
                raise ValueError("feature_names length must match column count")
            object.__setattr__(self, "feature_names", names)
        feats.setflags(write=False)
        labs.setflags(write=False)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def with_labels(self, labels: np.ndarray, class_count: int | None = None) -> "Dataset":
        """Same features, new labels."""
        return Dataset(
            self.features,
            labels,
            self.class_count if class_count is None else class_count,
            self.feature_names,
        )


@dataclass(frozen=True)
class FoldAssignment:
    """Assignment of each row to one of ``k`` cross-validation folds."""

    fold_of: np.ndarray
    k: int

    def __post_init__(self):
        fold_of = np.array(self.fold_of, dtype=np.int64, copy=True)
        if fold_of.ndim != 1:
            raise ValueError("fold_of must be 1-D")
        if self.k < 2:
            raise ValueError("k must be at least 2")
        present = np.unique(fold_of)
        if present.size and (present.min() < 0 or present.max() >= self.k):
            raise ValueError("fold indices must lie in [0, k)")
        if present.size != self.k:
            raise ValueError("every fold must contain at least one row")
        fold_of.setflags(write=False)
        object.__setattr__(self, "fold_of", fold_of)

    def test_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of == fold)

    def train_rows(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.fold_of != fold)


def load_csv(path: str, label_column: str = "label") -> Dataset:
    """Load a dataset from a headed CSV file.

    The named label column may hold arbitrary strings; classes are encoded
    by order of first appearance.  Every other column must parse as a
    finite float.  Comma separator, ``.`` decimal point, UTF-8.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    ValueError
        If the label column is missing, any cell fails to parse (the
        message names the 1-based data row and the column), or fewer
        than 2 data rows are present.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, header row required") from None
        header = [h.strip() for h in header]
        if label_column not in header:
            raise ValueError(f"{path}: label column '{label_column}' not found in header")
        label_idx = header.index(label_column)
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)

        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for row_num, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            raw_labels.append(row[label_idx].strip())
            values = []
            for i, cell in enumerate(row):
                if i == label_idx:
                    continue
                try:
                    v = float(cell)
                except ValueError:
                    v = float("nan")
                if not np.isfinite(v):
                    raise ValueError(
                        f"{path}: non-numeric cell {cell!r} at row {row_num}, "
                        f"column '{header[i]}'"
                    )
                values.append(v)
            rows.append(values)

    if len(rows) < 2:
        raise ValueError(f"{path}: at least 2 data rows required, found {len(rows)}")

    seen: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, name in enumerate(raw_labels):
        if name not in seen:
            seen[name] = len(seen)
        labels[i] = seen[name]
    return Dataset(np.asarray(rows, dtype=np.float64), labels, len(seen), feature_names)


def save_csv(d: Dataset, path: str) -> None:
    """Write a dataset as CSV with the label column named ``label``.

    Labels are written as their integer codes; reloading re-encodes them
    by first appearance, which preserves class structure up to a
    consistent renaming.
    """
    names = d.feature_names or tuple(f"f{i}" for i in range(d.n_features))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label", *names])
        for y, x in zip(d.labels, d.features):
            writer.writerow([int(y), *(repr(float(v)) for v in x)])


def scale_unit_interval(d: Dataset) -> Dataset:
    """Min-max scale every feature column into ``[0, 1]``.

    Constant columns map to 0.
    """
    lo = d.features.min(axis=0)
    hi = d.features.max(axis=0)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = (d.features - lo) / safe
    scaled[:, span == 0] = 0.0
    return Dataset(scaled, d.labels, d.class_count, d.feature_names)


def permute_labels(d: Dataset, plan: PermutationPlan) -> Dataset:
    """Uniformly permute the label vector, leaving the features fixed.

    The label histogram is preserved exactly.
    """
    order = plan.rng("permute").permutation(d.n)
    return d.with_labels(d.labels[order])


def shuffle_rows(d: Dataset, plan: PermutationPlan) -> Dataset:
    """Shuffle rows jointly with their labels (pairs stay intact)."""
    order = plan.rng("shuffle").permutation(d.n)
    return Dataset(d.features[order], d.labels[order], d.class_count, d.feature_names)


def trim_to_even(d: Dataset, plan: PermutationPlan) -> Dataset:
    """Drop one row after a seeded shuffle so the row count becomes even.

    Returns the dataset unchanged when ``n`` is already even.
    """
    if d.n % 2 == 0:
        return d
    order = plan.rng("trim").permutation(d.n)[:-1]
    return Dataset(d.features[order], d.labels[order], d.class_count, d.feature_names)


def stratified_folds(d: Dataset, k: int, plan: PermutationPlan) -> FoldAssignment:
    """Assign rows to ``k`` folds, stratified by class.

    Within every class the per-fold counts differ by at most one, and the
    extra rows of successive classes are dealt to the currently lightest
    folds so the overall fold sizes also differ by at most one.

    Raises
    ------
    ValueError
        If any class has fewer than ``k`` members.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    counts = np.bincount(d.labels, minlength=d.class_count)
    lacking = np.flatnonzero(counts < k)
    if lacking.size:
        raise ValueError(
            f"class {int(lacking[0])} has {int(counts[lacking[0]])} rows, "
            f"fewer than k={k}"
        )
    gen = plan.rng("folds")
    fold_of = np.empty(d.n, dtype=np.int64)
    load = np.zeros(k, dtype=np.int64)
    for c in range(d.class_count):
        rows = np.flatnonzero(d.labels == c)
        rows = rows[gen.permutation(rows.size)]
        base, extra = divmod(rows.size, k)
        per_fold = np.full(k, base, dtype=np.int64)
        if extra:
            lightest = np.argsort(load, kind="stable")[:extra]
            per_fold[lightest] += 1
        load += per_fold
        start = 0
        for f in range(k):
            fold_of[rows[start : start + per_fold[f]]] = f
            start += per_fold[f]
    return FoldAssignment(fold_of, k)


def split_null_groups(d: Dataset, plan: PermutationPlan) -> Dataset:
    """Split a one-condition dataset into two equal pseudo-groups.

    Exactly ``n/2`` rows get label 0 and ``n/2`` get label 1, chosen
    uniformly at random.  The result is a valid two-class dataset whose
    group difference is null by construction.

    Raises
    ------
    ValueError
        If the dataset has more than one class or an odd row count.
    """
    if d.class_count != 1:
        raise ValueError("split_null_groups requires a one-condition dataset")
    if d.n % 2 != 0:
        raise ValueError("split_null_groups requires an even row count")
    order = plan.rng("split").permutation(d.n)
    labels = np.zeros(d.n, dtype=np.int64)
    labels[order[d.n // 2 :]] = 1
    return d.with_labels(labels, class_count=2)


def synth_effect(
    n_per_class: int,
    dim: int,
    effect: float,
    plan: PermutationPlan,
    classes: int = 2,
) -> Dataset:
    """Generate Gaussian class blobs with a controlled mean separation.

    Class ``c`` is drawn from an isotropic unit-variance Gaussian whose
    mean is ``c * effect`` in the first ``min(5, dim)`` coordinates and 0
    elsewhere.  ``effect = 0`` makes all classes identically distributed.
    Rows are shuffled so class order carries no information.
    """
    if n_per_class < 1:
        raise ValueError("n_per_class must be positive")
    if dim < 1:
        raise ValueError("dim must be positive")
    if classes < 1:
        raise ValueError("classes must be positive")
    if effect < 0:
        raise ValueError("effect must be non-negative")
    gen = plan.rng("synth")
    shifted = min(5, dim)
    n = n_per_class * classes
    x = gen.standard_normal((n, dim))
    y = np.repeat(np.arange(classes, dtype=np.int64), n_per_class)
    x[:, :shifted] += (y * effect)[:, None]
    order = gen.permutation(n)
    names = tuple(f"f{i}" for i in range(dim))
    return Dataset(x[order], y[order], classes, names)
