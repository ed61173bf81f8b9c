"""Randomized hyperparameter search, evaluation and the universe accuracy run."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import (ConvergenceWarning, EmptyGrid, EmptyTestSet, EmptyUniverse,
                      SingleClassTraining, TooFewRows, TooShort)
from ..rng import as_generator, substream
from .features import LABELS, FeatureDataset, build_features
from .svm import ConstantModel, train_svm

C_GRID = (10.0, 100.0, 1000.0, 10000.0, 100000.0, 1000000.0)
GAMMA_GRID = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)
N_SAMPLES = 10
N_SPLITS = 2


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # rows = true (-1, 0, +1), columns = predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def to_csv(self) -> str:
        lines = ["true\\pred,-1,0,1"]
        for lab, row in zip(LABELS, self.counts.tolist()):
            lines.append(f"{lab}," + ",".join(str(v) for v in row))
        return "\n".join(lines) + "\n"


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    y_true = np.asarray(y_true)
    y_pred = np.asarray(y_pred)
    if len(y_true) == 0:
        raise EmptyTestSet("no test rows")
    if len(y_true) != len(y_pred):
        raise ValueError("label arrays differ in length")
    counts = np.zeros((3, 3), dtype=np.int64)
    np.add.at(counts, (y_true.astype(np.int64) + 1, y_pred.astype(np.int64) + 1), 1)
    return ConfusionMatrix(counts)


def evaluate(model, dataset: FeatureDataset) -> ConfusionMatrix:
    X, y = dataset.test
    if len(y) == 0:
        raise EmptyTestSet(f"{dataset.symbol}: empty test split")
    return confusion_matrix(y, model.predict(X))


def time_series_splits(n_rows: int, n_splits: int = N_SPLITS):
    """Expanding-window folds: ``(train_end, test_start, test_end)`` per fold.

    The validation block is ``n_rows // (n_splits + 1)`` rows; fold ``j``
    trains on everything before its block.
    """
    size = n_rows // (n_splits + 1)
    if size < 1:
        raise TooFewRows(f"{n_rows} rows cannot form {n_splits} expanding splits")
    folds = []
    for j in range(n_splits):
        start = n_rows - (n_splits - j) * size
        folds.append((start, start, start + size))
    return folds


def fit_or_constant(X, y, C, gamma):
    """SVM fit, or a constant predictor when the rows hold a single class."""
    try:
        return train_svm(X, y, C, gamma)
    except SingleClassTraining:
        return ConstantModel(int(y[0]))


def cv_accuracy(X, y, C: float, gamma: float, n_splits: int = N_SPLITS) -> float:
    """Mean validation accuracy over the expanding-window folds."""
    scores = []
    for train_end, lo, hi in time_series_splits(len(y), n_splits):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            model = fit_or_constant(X[:train_end], y[:train_end], C, gamma)
        scores.append(float(np.mean(model.predict(X[lo:hi]) == y[lo:hi])))
    return float(np.mean(scores))


def hyperparam_search(X, y, C_grid: Sequence[float] = C_GRID, gamma_grid: Sequence[float] = GAMMA_GRID,
                      n_samples: int = N_SAMPLES, rng=0,
                      score_fn: Callable | None = None) -> tuple:
    """Best ``(C, gamma)`` among ``n_samples`` pairs drawn without replacement.

    Pairs are enumerated C-major. Ties keep the earliest sampled pair. A
    single-pair grid is returned without scoring.
    """
    grid = [(float(c), float(g)) for c in C_grid for g in gamma_grid]
    if not grid:
        raise EmptyGrid("hyperparameter grid is empty")
    if not 1 <= n_samples <= len(grid):
        raise ValueError(f"n_samples must be within 1..{len(grid)}")
    if len(grid) == 1:
        return grid[0]
    score_fn = cv_accuracy if score_fn is None else score_fn
    time_series_splits(len(y))
    picks = as_generator(rng).choice(len(grid), size=n_samples, replace=False)
    best, best_score = None, -np.inf
    for k in picks.tolist():
        C, g = grid[k]
        score = score_fn(X, y, C, g)
        if score > best_score:
            best, best_score = grid[k], score
    return best


@dataclass
class AssetResult:
    symbol: str
    C: float
    gamma: float
    confusion: ConfusionMatrix
    n_rows: int
    split_index: int

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy


@dataclass
class AccuracyReport:
    percent: int
    mean_accuracy: float
    assets: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)


def classify_asset(dataset: FeatureDataset, rng, C_grid=C_GRID, gamma_grid=GAMMA_GRID,
                   n_samples: int = N_SAMPLES) -> AssetResult:
    """Search on the training rows, refit on all of them, score on the test rows."""
    X_tr, y_tr = dataset.train
    C, g = hyperparam_search(X_tr, y_tr, C_grid, gamma_grid, n_samples, rng)
    model = fit_or_constant(X_tr, y_tr, C, g)
    return AssetResult(dataset.symbol, C, g, evaluate(model, dataset), len(dataset), dataset.split_index)


def strategy_returns(dataset: FeatureDataset, predictions) -> np.ndarray:
    """Next-day return times the predicted signal on the test rows."""
    return dataset.ret[dataset.split_index:] * np.asarray(predictions, dtype=np.float64)


def average_accuracy(universe, n: int, seed: int = 42, C_grid=C_GRID, gamma_grid=GAMMA_GRID,
                     n_samples: int = N_SAMPLES) -> AccuracyReport:
    """Mean test accuracy over the assets that survive feature construction.

    Asset ``i`` samples hyperparameters from ``("classify", "search", i, symbol)``.
    """
    assets, skipped = [], {}
    for i, s in enumerate(universe):
        try:
            ds = build_features(s, n)
            res = classify_asset(ds, substream(seed, "classify", "search", i, s.symbol),
                                 C_grid, gamma_grid, min(n_samples, len(C_grid) * len(gamma_grid)))
        except (TooShort, TooFewRows, EmptyTestSet) as exc:
            skipped[s.symbol] = type(exc).__name__
            continue
        assets.append(res)
    if not assets:
        raise EmptyUniverse("no asset survived feature construction")
    mean = float(np.mean([a.accuracy for a in assets]))
    return AccuracyReport(int(round(mean * 100)), mean, assets, skipped)
