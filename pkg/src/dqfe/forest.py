"""From-scratch random forest plus the model-selection protocol.

Trees split on axis-aligned thresholds by maximum Gini impurity decrease
(ties: lowest feature index, then lowest threshold) and are grown on
seeded bootstrap resamples; prediction sums leaf class-count vectors and
takes the argmax (ties: lowest class id).  Everything is deterministic
bit-for-bit given (data, params, seed): per-tree streams derive from
(seed, tree index), fold shuffles from (seed, repetition), so parallel
tree training and grid evaluation order cannot change any result.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import kernels
from .dataset import FeatureTable
from .rng import SplitMix64, derive_seed

_TREE_TAG = 0x7EE5
_FOLD_TAG = 0xF01D
_CVFIT_TAG = 0xCF17

FOREST_FORMAT = "forest-v1"


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    max_features: object = "sqrt"
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be positive")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be positive or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be positive")
        mf = self.max_features
        if isinstance(mf, str):
            if mf not in ("sqrt", "all"):
                raise ValueError("max_features must be 'sqrt', 'all', or a fraction")
        else:
            mf = float(mf)
            if not (0.0 < mf <= 1.0):
                raise ValueError("max_features fraction must lie in (0, 1]")
            object.__setattr__(self, "max_features", mf)

    def feature_budget(self, n_features: int) -> int:
        if self.max_features == "all":
            return n_features
        if self.max_features == "sqrt":
            k = int(math.floor(math.sqrt(n_features)))
        else:
            k = int(math.floor(self.max_features * n_features))
        return min(n_features, max(1, k))

    def to_dict(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_samples_leaf": self.min_samples_leaf,
            "max_features": self.max_features,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ForestParams":
        return cls(
            n_trees=int(d["n_trees"]),
            max_depth=None if d["max_depth"] is None else int(d["max_depth"]),
            min_samples_leaf=int(d["min_samples_leaf"]),
            max_features=d["max_features"],
            seed=int(d["seed"]),
        )


@dataclass
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


@dataclass
class TrainedForest:
    trees: list
    n_classes: int
    feature_count: int
    params: ForestParams


def _fit_trees(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    params: ForestParams,
    threads: int | None = None,
) -> list:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    k = params.feature_budget(X.shape[1])
    depth = -1 if params.max_depth is None else params.max_depth

    def grow(t: int) -> Tree:
        seed = derive_seed(derive_seed(params.seed, _TREE_TAG), t)
        f, thr, le, ri, cnt, _ = kernels.build_tree(
            X, y, n_classes, seed, depth, params.min_samples_leaf, k
        )
        return Tree(f, thr, le, ri, cnt)

    n_workers = threads if threads else (os.cpu_count() or 1)
    if n_workers > 1 and params.n_trees > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(grow, range(params.n_trees)))
    return [grow(t) for t in range(params.n_trees)]


def train_forest(
    table: FeatureTable, params: ForestParams, threads: int | None = None
) -> TrainedForest:
    """Fit on the table's train-tagged rows."""
    mask = table.train_mask
    X = table.features[mask]
    y = table.labels[mask]
    if X.shape[0] == 0:
        raise ValueError("no train rows to fit on")
    if np.unique(y).size < 2:
        raise ValueError("training data contains a single class")
    trees = _fit_trees(X, y, table.n_classes, params, threads)
    return TrainedForest(trees, table.n_classes, table.n_features, params)


def _tree_votes(tree: Tree, X: np.ndarray) -> np.ndarray:
    node = np.zeros(X.shape[0], dtype=np.int64)
    active = tree.feature[node] >= 0
    while active.any():
        rows = np.nonzero(active)[0]
        nd = node[rows]
        go_left = X[rows, tree.feature[nd]] <= tree.threshold[nd]
        node[rows] = np.where(go_left, tree.left[nd], tree.right[nd])
        active = tree.feature[node] >= 0
    return tree.counts[node]


def predict_votes(forest: TrainedForest, X: np.ndarray) -> np.ndarray:
    votes = np.zeros((X.shape[0], forest.n_classes), dtype=np.int64)
    for tree in forest.trees:
        votes += _tree_votes(tree, X)
    return votes


def predict(forest: TrainedForest, table: FeatureTable) -> np.ndarray:
    """Predicted label per row; argmax over summed leaf counts, ties low."""
    if table.n_features != forest.feature_count:
        raise ValueError(
            f"table has {table.n_features} columns, forest expects {forest.feature_count}"
        )
    return np.argmax(predict_votes(forest, table.features), axis=1)


def accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


@dataclass
class CvReport:
    """Fold x repetition accuracy matrix with its aggregates."""

    accuracies: np.ndarray
    mean: float
    std: float
    params: ForestParams

    def to_json(self) -> str:
        return json.dumps(
            {
                "accuracies": self.accuracies.tolist(),
                "mean": self.mean,
                "std": self.std,
                "params": self.params.to_dict(),
            },
            sort_keys=True,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "CvReport":
        d = json.loads(text)
        return cls(
            np.array(d["accuracies"], dtype=np.float64),
            float(d["mean"]),
            float(d["std"]),
            ForestParams.from_dict(d["params"]),
        )


def stratified_folds(y: np.ndarray, folds: int, seed: int, repetition: int) -> np.ndarray:
    """Fold id per row; per-class counts across folds differ by at most 1.

    The assignment depends only on (labels, folds, seed, repetition), so
    every grid point evaluated under one seed sees identical folds.
    """
    rng = SplitMix64(derive_seed(derive_seed(seed, _FOLD_TAG), repetition))
    fold_of = np.empty(y.shape[0], dtype=np.int64)
    for c in np.unique(y):
        idx = np.nonzero(y == c)[0].tolist()
        if len(idx) < folds:
            raise ValueError(
                f"class {int(c)} has only {len(idx)} rows; need at least {folds}"
            )
        rng.shuffle(idx)
        for pos, row in enumerate(idx):
            fold_of[row] = pos % folds
    return fold_of


def cross_validate(
    table: FeatureTable,
    params: ForestParams,
    folds: int = 5,
    repetitions: int = 10,
    seed: int = 0,
    threads: int | None = None,
) -> CvReport:
    """Repeated stratified k-fold accuracy over the table's train rows."""
    mask = table.train_mask
    X = np.ascontiguousarray(table.features[mask], dtype=np.float64)
    y = np.ascontiguousarray(table.labels[mask], dtype=np.int64)
    acc = np.empty((folds, repetitions))
    for rep in range(repetitions):
        fold_of = stratified_folds(y, folds, seed, rep)
        for f in range(folds):
            hold = fold_of == f
            fit_params = replace(
                params,
                seed=derive_seed(
                    derive_seed(derive_seed(seed, _CVFIT_TAG), rep), f
                ),
            )
            trees = _fit_trees(X[~hold], y[~hold], table.n_classes, fit_params, threads)
            forest = TrainedForest(trees, table.n_classes, table.n_features, fit_params)
            pred = np.argmax(predict_votes(forest, X[hold]), axis=1)
            acc[f, rep] = accuracy(y[hold], pred)
    return CvReport(acc, float(acc.mean()), float(acc.std()), params)


def grid_search(
    table: FeatureTable,
    grid,
    folds: int = 5,
    repetitions: int = 10,
    seed: int = 0,
    threads: int | None = None,
) -> tuple:
    """Evaluate every grid point under identical fold assignments; the
    highest mean accuracy wins, ties going to the earliest grid entry."""
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be non-empty")
    best_params, best_report = None, None
    for params in grid:
        report = cross_validate(table, params, folds, repetitions, seed, threads)
        if best_report is None or report.mean > best_report.mean:
            best_params, best_report = params, report
    return best_params, best_report


@dataclass
class MultiSeedReport:
    seeds: list
    accuracies: np.ndarray
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {
            "seeds": list(self.seeds),
            "accuracies": self.accuracies.tolist(),
            "mean": self.mean,
            "std": self.std,
        }


def multi_seed_eval(
    train_table: FeatureTable,
    test_table: FeatureTable,
    params: ForestParams,
    seeds,
    threads: int | None = None,
) -> MultiSeedReport:
    """Retrain on all rows of the train table once per seed and score the
    test table; reports the per-seed test accuracies."""
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    Xtr = np.ascontiguousarray(train_table.features, dtype=np.float64)
    ytr = np.ascontiguousarray(train_table.labels, dtype=np.int64)
    if np.unique(ytr).size < 2:
        raise ValueError("training data contains a single class")
    n_classes = max(train_table.n_classes, test_table.n_classes)
    accs = np.empty(len(seeds))
    for e, s in enumerate(seeds):
        fit_params = replace(params, seed=int(s))
        trees = _fit_trees(Xtr, ytr, n_classes, fit_params, threads)
        forest = TrainedForest(trees, n_classes, train_table.n_features, fit_params)
        pred = np.argmax(predict_votes(forest, test_table.features), axis=1)
        accs[e] = accuracy(test_table.labels, pred)
    return MultiSeedReport(seeds, accs, float(accs.mean()), float(accs.std()))


def forest_to_json(forest: TrainedForest) -> str:
    return json.dumps(
        {
            "format": FOREST_FORMAT,
            "n_classes": forest.n_classes,
            "feature_count": forest.feature_count,
            "params": forest.params.to_dict(),
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "counts": t.counts.tolist(),
                }
                for t in forest.trees
            ],
        },
        sort_keys=True,
        indent=2,
    )


def forest_from_json(text: str) -> TrainedForest:
    d = json.loads(text)
    if d.get("format") != FOREST_FORMAT:
        raise ValueError(f"unsupported forest format {d.get('format')!r}")
    trees = [
        Tree(
            np.array(t["feature"], dtype=np.int32),
            np.array(t["threshold"], dtype=np.float64),
            np.array(t["left"], dtype=np.int32),
            np.array(t["right"], dtype=np.int32),
            np.array(t["counts"], dtype=np.int64),
        )
        for t in d["trees"]
    ]
    return TrainedForest(
        trees,
        int(d["n_classes"]),
        int(d["feature_count"]),
        ForestParams.from_dict(d["params"]),
    )
