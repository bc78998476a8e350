"""Tabular feature tables: CSV ingestion, validation, scaling, splits.

This is the boundary between any CSV producer (an image feature extractor,
a spreadsheet export, ...) and the quantum pipeline.  The CSV contract:
header row; feature columns hold decimal floats; an integer ``label``
column; an optional ``split`` column containing the literal words
``train`` or ``test`` (rows default to train when absent).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

TRAIN = "train"
TEST = "test"


class DataFormatError(ValueError):
    """CSV cannot be parsed into a table (I/O or syntax level)."""


class DataValidationError(ValueError):
    """Parsed data violates a table invariant."""


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FeatureTable:
    """Immutable N x n feature matrix with labels and train/test tags.

    ``n_classes`` may exceed the labels actually present (subsetting a
    table keeps the class space intact); pass 0 to infer it.  Column
    count and label contiguity are checked strictly at the CSV boundary
    by :func:`load_table`, while programmatic construction only enforces
    shape, finiteness, and label range.
    """

    features: np.ndarray
    labels: np.ndarray
    split: np.ndarray
    column_names: tuple[str, ...]
    n_classes: int = 0

    def __post_init__(self):
        feats = np.ascontiguousarray(np.asarray(self.features, dtype=np.float64))
        if feats.ndim != 2:
            raise DataValidationError("features must be a 2-D matrix")
        n_rows, n_cols = feats.shape
        if n_rows == 0:
            raise DataValidationError("table must contain at least one row")
        if n_cols < 1:
            raise DataValidationError("table must contain at least one feature column")
        if not np.all(np.isfinite(feats)):
            r, c = np.argwhere(~np.isfinite(feats))[0]
            raise DataValidationError(
                f"non-finite feature value at row {r}, column {self.column_names[c]!r}"
            )
        labels = np.asarray(self.labels, dtype=np.int64)
        if labels.shape != (n_rows,):
            raise DataValidationError("labels must be one value per row")
        if labels.size and labels.min() < 0:
            raise DataValidationError("labels must be non-negative")
        n_classes = self.n_classes if self.n_classes else int(labels.max()) + 1
        if labels.max() >= n_classes:
            raise DataValidationError(
                f"label {int(labels.max())} outside class range 0..{n_classes - 1}"
            )
        split = np.asarray(self.split, dtype="U5")
        if split.shape != (n_rows,):
            raise DataValidationError("split must be one tag per row")
        bad = ~np.isin(split, (TRAIN, TEST))
        if bad.any():
            raise DataValidationError(
                f"split tag must be 'train' or 'test', got {split[bad][0]!r}"
            )
        names = tuple(str(c) for c in self.column_names)
        if len(names) != n_cols:
            raise DataValidationError("column_names must match feature columns")
        if len(set(names)) != len(names):
            raise DataValidationError("column names must be unique")
        object.__setattr__(self, "features", _readonly(feats))
        object.__setattr__(self, "labels", _readonly(labels))
        object.__setattr__(self, "split", _readonly(split))
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "n_classes", n_classes)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def train_mask(self) -> np.ndarray:
        return self.split == TRAIN

    @property
    def test_mask(self) -> np.ndarray:
        return self.split == TEST

    def subset(self, mask: np.ndarray) -> "FeatureTable":
        return FeatureTable(
            self.features[mask],
            self.labels[mask],
            self.split[mask],
            self.column_names,
            self.n_classes,
        )

    def train_rows(self) -> "FeatureTable":
        return self.subset(self.train_mask)

    def test_rows(self) -> "FeatureTable":
        return self.subset(self.test_mask)

    def validate_contiguous(self) -> None:
        """Enforce the ingestion invariants: every class id 0..C-1 occurs,
        and every class occurs in the train split."""
        present = set(np.unique(self.labels).tolist())
        expected = set(range(self.n_classes))
        if present != expected:
            missing = sorted(expected - present)
            raise DataValidationError(
                f"label set is not contiguous 0..{self.n_classes - 1}: missing {missing}"
            )
        train_present = set(np.unique(self.labels[self.train_mask]).tolist())
        if train_present != expected:
            missing = sorted(expected - train_present)
            raise DataValidationError(
                f"classes {missing} have no rows in the train split"
            )


def load_table(path, label_column: str = "label") -> FeatureTable:
    """Load and strictly validate a feature-table CSV.

    Feature columns are every header entry except ``label_column`` and the
    optional ``split`` column, kept in file order.  At least two feature
    columns are required at this boundary.
    """
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataFormatError(f"{path}: duplicate column names in header")
        if label_column not in header:
            raise DataFormatError(f"{path}: missing label column {label_column!r}")
        label_idx = header.index(label_column)
        split_idx = header.index("split") if "split" in header else None
        feat_idx = [
            i for i in range(len(header)) if i != label_idx and i != split_idx
        ]
        if len(feat_idx) < 2:
            raise DataFormatError(
                f"{path}: need at least 2 feature columns, found {len(feat_idx)}"
            )
        feat_names = [header[i] for i in feat_idx]

        rows, labels, split = [], [], []
        for rec in reader:
            line = reader.line_num
            if len(rec) != len(header):
                raise DataFormatError(
                    f"{path}: line {line}: expected {len(header)} fields, got {len(rec)}"
                )
            vals = []
            for i in feat_idx:
                cell = rec[i].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: line {line}, column {header[i]!r}: "
                        f"cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise DataValidationError(
                        f"{path}: line {line}, column {header[i]!r}: "
                        f"non-finite value {cell!r}"
                    )
                vals.append(v)
            cell = rec[label_idx].strip()
            try:
                lab = int(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: line {line}, column {label_column!r}: "
                    f"cannot parse {cell!r} as an integer label"
                ) from None
            if lab < 0:
                raise DataValidationError(
                    f"{path}: line {line}: negative label {lab}"
                )
            tag = rec[split_idx].strip() if split_idx is not None else TRAIN
            if tag not in (TRAIN, TEST):
                raise DataValidationError(
                    f"{path}: line {line}: split tag must be train or test, got {tag!r}"
                )
            rows.append(vals)
            labels.append(lab)
            split.append(tag)

    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    table = FeatureTable(
        np.array(rows, dtype=np.float64),
        np.array(labels, dtype=np.int64),
        np.array(split, dtype="U5"),
        tuple(feat_names),
    )
    table.validate_contiguous()
    return table


def save_table(table: FeatureTable, path) -> None:
    """Write a table in the CSV contract; floats use shortest round-trip repr."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(table.column_names) + ["label", "split"])
        for r in range(table.n_rows):
            w.writerow(
                [repr(float(v)) for v in table.features[r]]
                + [int(table.labels[r]), str(table.split[r])]
            )


SCALING_METHODS = ("minmax_symmetric", "zscore", "none")


@dataclass(frozen=True)
class ScalingSpec:
    """Per-column scaling parameters, learned on the train split only.

    ``params`` holds one (a, b) pair per column: (min, max) for
    minmax_symmetric, (mean, population stdev) for zscore, zeros for none.
    """

    method: str
    params: np.ndarray

    def __post_init__(self):
        if self.method not in SCALING_METHODS:
            raise ValueError(f"unknown scaling method {self.method!r}")
        p = np.asarray(self.params, dtype=np.float64)
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("params must be an (n, 2) array")
        object.__setattr__(self, "params", _readonly(p))

    @property
    def n_columns(self) -> int:
        return self.params.shape[0]

    def to_dict(self) -> dict:
        return {"method": self.method, "params": self.params.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingSpec":
        return cls(d["method"], np.array(d["params"], dtype=np.float64))


def fit_scaling(table: FeatureTable, method: str = "minmax_symmetric") -> ScalingSpec:
    """Learn per-column scaling parameters from the train rows only."""
    if method not in SCALING_METHODS:
        raise ValueError(f"unknown scaling method {method!r}")
    train = table.features[table.train_mask]
    if train.shape[0] == 0:
        raise DataValidationError("cannot fit scaling: train split is empty")
    if method == "minmax_symmetric":
        params = np.stack([train.min(axis=0), train.max(axis=0)], axis=1)
    elif method == "zscore":
        params = np.stack([train.mean(axis=0), train.std(axis=0)], axis=1)
    else:
        params = np.zeros((table.n_features, 2))
    return ScalingSpec(method, params)


def apply_scaling(table: FeatureTable, spec: ScalingSpec) -> FeatureTable:
    """Scale all rows (train and test) with train-fit parameters.

    Out-of-range test values are deliberately not clipped; degenerate
    (constant-on-train) columns map to 0 everywhere.
    """
    if spec.method == "none":
        return table
    if spec.n_columns != table.n_features:
        raise DataValidationError(
            f"scaling spec has {spec.n_columns} columns, table has {table.n_features}"
        )
    x = table.features
    a, b = spec.params[:, 0], spec.params[:, 1]
    if spec.method == "minmax_symmetric":
        span = b - a
        degenerate = span == 0.0
        safe = np.where(degenerate, 1.0, span)
        out = 2.0 * ((x - a) / safe) - 1.0
    else:  # zscore
        degenerate = b == 0.0
        safe = np.where(degenerate, 1.0, b)
        out = (x - a) / safe
    out[:, degenerate] = 0.0
    return FeatureTable(
        out, table.labels, table.split, table.column_names, table.n_classes
    )
