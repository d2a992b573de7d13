"""Datasets, CSV ingestion, standardization, binary task decomposition, and seeded splits."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np

__all__ = [
    "Dataset",
    "BinaryTask",
    "SplitSpec",
    "StandardizationStats",
    "ParseError",
    "SchemaError",
    "load_csv_dataset",
    "compute_standardization",
    "apply_standardization",
    "decompose_binary_tasks",
    "make_split",
]


class ParseError(ValueError):
    """A CSV file could not be parsed into a numeric dataset."""


class SchemaError(ValueError):
    """A CSV file does not match the requested column layout."""


@dataclass
class Dataset:
    """Feature matrix with optional per-row class labels.

    Parameters
    ----------
    features : (n, K) array
        One row per point.  Every value must be finite.
    class_labels : sequence of hashables, optional
        Class identifier per row; length must equal n.
    """

    features: np.ndarray
    class_labels: tuple | None = None

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D array (rows = points)")
        n, k = self.features.shape
        if n < 1 or k < 1:
            raise ValueError("dataset needs at least one point and one feature")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite values")
        if self.class_labels is not None:
            self.class_labels = tuple(self.class_labels)
            if len(self.class_labels) != n:
                raise ValueError(
                    f"class_labels has length {len(self.class_labels)}, expected {n}"
                )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def num_features(self) -> int:
        return self.features.shape[1]


@dataclass
class BinaryTask:
    """A two-class view of a dataset with signed labels (order-first class is +1)."""

    positive_class: object
    negative_class: object
    point_indices: np.ndarray
    signed_labels: np.ndarray

    def __post_init__(self):
        self.point_indices = np.asarray(self.point_indices, dtype=int)
        self.signed_labels = np.asarray(self.signed_labels, dtype=int)
        if self.positive_class == self.negative_class:
            raise ValueError("positive and negative class must differ")
        if self.point_indices.shape != self.signed_labels.shape:
            raise ValueError("point_indices and signed_labels must align")
        if not np.all(np.isin(self.signed_labels, (-1, 1))):
            raise ValueError("signed labels must be -1 or +1")

    @property
    def n(self) -> int:
        return self.point_indices.size

    def labels_for(self, dataset_indices) -> np.ndarray:
        """Signed labels for a subset given by dataset-level indices."""
        lookup = dict(zip(self.point_indices.tolist(), self.signed_labels.tolist()))
        return np.array([lookup[int(i)] for i in np.asarray(dataset_indices)], dtype=int)


@dataclass
class SplitSpec:
    """Train/validation/test folds plus the labeled subset of the training fold.

    All index arrays refer to rows of the parent dataset.  ``labeled`` is a
    subset of ``train``; ``unlabeled`` is its complement within ``train``.
    """

    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    labeled: np.ndarray
    unlabeled: np.ndarray
    seed: int

    def __post_init__(self):
        for name in ("train", "validation", "test", "labeled", "unlabeled"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=int))
        tr, va, te = set(self.train), set(self.validation), set(self.test)
        if tr & va or tr & te or va & te:
            raise ValueError("train, validation and test folds must be disjoint")
        lab, unl = set(self.labeled), set(self.unlabeled)
        if not lab <= tr:
            raise ValueError("labeled set must be a subset of the training fold")
        if lab & unl or (lab | unl) != tr:
            raise ValueError("labeled and unlabeled must partition the training fold")
        if len(self.labeled) < 1:
            raise ValueError("at least one labeled point is required")
        if len(self.validation) > len(self.labeled):
            raise ValueError("validation fold may not exceed the labeled count")

    @property
    def n_l(self) -> int:
        return self.labeled.size

    @property
    def n_u(self) -> int:
        return self.unlabeled.size


@dataclass
class StandardizationStats:
    """Per-feature mean and population standard deviation, plus their mean scale."""

    per_feature_mean: np.ndarray
    per_feature_std: np.ndarray
    sigma_bar: float

    def __post_init__(self):
        self.per_feature_mean = np.asarray(self.per_feature_mean, dtype=float)
        self.per_feature_std = np.asarray(self.per_feature_std, dtype=float)
        if np.any(self.per_feature_std < 0):
            raise ValueError("standard deviations must be nonnegative")


def load_csv_dataset(path, label_column=None, header: bool = False) -> Dataset:
    """Load a comma-separated file into a :class:`Dataset`.

    Parameters
    ----------
    path : str or path-like
        UTF-8 CSV file, one point per row.
    label_column : int, str, or None
        Column holding the class id.  An ``int`` selects by position
        (negative indices count from the end); a ``str`` selects by header
        name and requires ``header=True``.  ``None`` loads features only.
    header : bool
        Whether the first row is a header and should be skipped.

    Rows that are completely empty (e.g. a trailing newline) are ignored.
    Malformed rows and non-numeric feature cells raise :class:`ParseError`
    naming the offending line.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        raw = list(csv.reader(fh))

    names = None
    start_line = 1
    if header:
        if not raw:
            raise ParseError(f"{path}: no rows")
        names = [c.strip() for c in raw[0]]
        raw = raw[1:]
        start_line = 2

    rows = [(ln, r) for ln, r in enumerate(raw, start=start_line) if r]
    if not rows:
        raise ParseError(f"{path}: no rows")

    arity = len(rows[0][1])
    for ln, r in rows:
        if len(r) != arity:
            raise ParseError(f"{path}: line {ln}: expected {arity} fields, got {len(r)}")

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str):
            if names is None:
                raise SchemaError("selecting a label column by name requires header=True")
            if label_column not in names:
                raise SchemaError(f"label column {label_column!r} not found in header {names}")
            label_idx = names.index(label_column)
        else:
            label_idx = int(label_column)
            if label_idx < 0:
                label_idx += arity
            if not 0 <= label_idx < arity:
                raise SchemaError(f"label column {label_column} out of range for {arity} columns")
        if arity < 2:
            raise SchemaError("a labeled dataset needs at least one feature column")

    features = []
    labels = [] if label_idx is not None else None
    for ln, r in rows:
        vals = []
        for ci, cell in enumerate(r):
            if ci == label_idx:
                labels.append(cell.strip())
                continue
            try:
                vals.append(float(cell))
            except ValueError:
                raise ParseError(
                    f"{path}: line {ln}: non-numeric feature value {cell.strip()!r}"
                ) from None
        features.append(vals)

    return Dataset(np.array(features, dtype=float), labels)


def compute_standardization(dataset: Dataset, over) -> StandardizationStats:
    """Mean and population standard deviation per feature over the given rows."""
    idx = np.asarray(over, dtype=int)
    if idx.size == 0:
        raise ValueError("cannot standardize over an empty index set")
    sub = dataset.features[idx]
    mean = sub.mean(axis=0)
    std = sub.std(axis=0)  # population (divide by n)
    return StandardizationStats(mean, std, float(std.mean()))


def apply_standardization(features, stats: StandardizationStats) -> np.ndarray:
    """Center and scale features; constant features (std 0) are only centered."""
    x = np.asarray(features, dtype=float)
    scale = np.where(stats.per_feature_std > 0, stats.per_feature_std, 1.0)
    return (x - stats.per_feature_mean) / scale


def decompose_binary_tasks(dataset: Dataset, scheme: str = "one_vs_one") -> list[BinaryTask]:
    """Split a multi-class dataset into binary tasks.

    ``one_vs_one`` emits one task per unordered class pair, C(m, 2) in total.
    ``consecutive_pairs`` sorts the class ids and emits the m - 1 tasks over
    adjacent pairs.  Within a task the order-first class is mapped to +1.
    """
    if dataset.class_labels is None:
        raise ValueError("dataset has no class labels")
    if scheme not in ("one_vs_one", "consecutive_pairs"):
        raise ValueError(f"unknown scheme {scheme!r}")
    try:
        classes = sorted(set(dataset.class_labels))
    except TypeError:
        raise ValueError("class ids must be totally ordered") from None
    if len(classes) < 2:
        raise ValueError("need at least 2 classes to build binary tasks")

    if scheme == "one_vs_one":
        pairs = list(combinations(classes, 2))
    else:
        pairs = list(zip(classes[:-1], classes[1:]))

    labels = np.asarray(dataset.class_labels, dtype=object)
    tasks = []
    for pos, neg in pairs:
        mask = (labels == pos) | (labels == neg)
        idx = np.flatnonzero(mask)
        signed = np.where(labels[idx] == pos, 1, -1)
        tasks.append(BinaryTask(pos, neg, idx, signed))
    return tasks


def _deal_thirds(positions: np.ndarray, rng) -> tuple[list, list, list]:
    """Deal shuffled positions into train/validation/test, remainder train-first."""
    perm = positions[rng.permutation(positions.size)]
    base, rem = divmod(perm.size, 3)
    nt = base + (1 if rem > 0 else 0)
    nv = base + (1 if rem > 1 else 0)
    return list(perm[:nt]), list(perm[nt : nt + nv]), list(perm[nt + nv :])


def make_split(task: BinaryTask, labeled_fraction: float, seed: int) -> SplitSpec:
    """Deterministic three-fold split with a stratified labeled subset.

    Points of each class are shuffled with a generator seeded by ``seed`` and
    dealt into train/validation/test thirds (remainders go to train first, so
    the training fold always contains both classes).  The labeled subset has
    ``round(labeled_fraction * |train|)`` points, promoted so that each class
    contributes at least one; the validation fold is truncated to that count.
    Equal inputs always produce the identical split.
    """
    if not 0 < labeled_fraction <= 1:
        raise ValueError("labeled_fraction must lie in (0, 1]")
    if task.n < 3:
        raise ValueError("need at least 3 points to form three folds")
    if len(set(task.signed_labels.tolist())) < 2:
        raise ValueError("both classes must be present in the task")

    rng = np.random.default_rng(seed)
    train_loc, val_loc, test_loc = [], [], []
    for cls in (1, -1):
        t, v, s = _deal_thirds(np.flatnonzero(task.signed_labels == cls), rng)
        train_loc += t
        val_loc += v
        test_loc += s

    pool = np.array(train_loc, dtype=int)
    pool = pool[rng.permutation(pool.size)]
    n_train = pool.size
    n_l = int(round(labeled_fraction * n_train))
    if n_l < 2:
        warnings.warn(
            f"labeled fraction {labeled_fraction} yields {n_l} points; "
            "promoted to one labeled point per class",
            stacklevel=2,
        )
        n_l = 2
    n_l = min(n_l, n_train)

    labels = task.signed_labels
    chosen: list[int] = []
    for cls in (1, -1):  # one guaranteed representative per class
        for p in pool:
            if labels[p] == cls:
                chosen.append(int(p))
                break
    for p in pool:
        if len(chosen) >= n_l:
            break
        if int(p) not in chosen:
            chosen.append(int(p))

    val_perm = np.array(val_loc, dtype=int)
    val_perm = val_perm[rng.permutation(val_perm.size)][:n_l]

    ds_idx = task.point_indices
    labeled = np.sort(ds_idx[np.array(chosen, dtype=int)])
    train = np.sort(ds_idx[pool])
    unlabeled = np.setdiff1d(train, labeled)
    return SplitSpec(
        train=train,
        validation=np.sort(ds_idx[val_perm]),
        test=np.sort(ds_idx[np.array(test_loc, dtype=int)]),
        labeled=labeled,
        unlabeled=unlabeled,
        seed=seed,
    )
