"""Evaluation metrics and figure data: confusion matrices, 2-D PCA
projections, and the per-feature Fisher discriminant ratio.

The Fisher score here is the classical discriminant ratio, computed per
feature as the class-size-weighted variance of class means divided by the
class-size-weighted mean of within-class (population) variances, then
averaged over features.  This is an interpretation: "mean Fisher score"
admits several definitions, and this one is affine-invariant and cheap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateRankError(ValueError):
    """Data rank below 2: no meaningful 2-D projection exists."""


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("confusion matrix must be square")
        if c.min() < 0:
            raise ValueError("confusion counts must be non-negative")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())


def confusion(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    """Counts[true, predicted]."""
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.shape != yp.shape or yt.ndim != 1:
        raise ValueError("y_true and y_pred must be equal-length vectors")
    for name, arr in (("y_true", yt), ("y_pred", yp)):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise ValueError(f"{name} contains labels outside 0..{n_classes - 1}")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (yt, yp), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class PcaProjection:
    scores: np.ndarray
    components: np.ndarray
    explained: tuple

    @property
    def n_rows(self) -> int:
        return self.scores.shape[0]


def pca2(X) -> PcaProjection:
    """Project onto the top-2 principal axes of the sample covariance.

    Sign convention: each component's largest-magnitude loading is made
    positive.  Collinear data (rank < 2) raises DegenerateRankError.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 3 or X.shape[1] < 2:
        raise ValueError("need at least 3 rows and 2 columns")
    Xc = X - X.mean(axis=0)
    cov = (Xc.T @ Xc) / (X.shape[0] - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    eigvals = eigvals[::-1]
    eigvecs = eigvecs[:, ::-1]
    lam = np.maximum(eigvals, 0.0)
    if lam[0] <= 0.0 or lam[1] <= lam[0] * 1e-12:
        raise DegenerateRankError(
            "data rank is below 2; cannot build a 2-D projection"
        )
    comps = eigvecs[:, :2].copy()
    for k in range(2):
        lead = int(np.argmax(np.abs(comps[:, k])))
        if comps[lead, k] < 0:
            comps[:, k] = -comps[:, k]
    total = float(lam.sum())
    explained = (float(lam[0] / total), float(lam[1] / total))
    return PcaProjection(Xc @ comps, comps, explained)


@dataclass(frozen=True)
class FisherReport:
    ratios: np.ndarray
    mean: float


def fisher_mean(X, y, cap: float = 1e6) -> FisherReport:
    """Per-feature between/within variance ratio and its average.

    Zero within-class variance yields 0 when the between-class variance is
    also zero, otherwise the configured cap.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be 2-D with one label per row")
    classes = np.unique(y)
    if classes.size < 2:
        raise ValueError("need at least two classes")
    n = X.shape[0]
    mu = X.mean(axis=0)
    between = np.zeros(X.shape[1])
    within = np.zeros(X.shape[1])
    for c in classes:
        rows = X[y == c]
        if rows.shape[0] < 2:
            raise ValueError(f"class {int(c)} has fewer than 2 samples")
        w = rows.shape[0] / n
        mc = rows.mean(axis=0)
        between += w * (mc - mu) ** 2
        within += w * rows.var(axis=0)
    ratios = np.empty(X.shape[1])
    for f in range(X.shape[1]):
        if within[f] == 0.0:
            ratios[f] = 0.0 if between[f] == 0.0 else cap
        else:
            ratios[f] = between[f] / within[f]
    return FisherReport(ratios, float(ratios.mean()))
