"""Scoring, the tree-count grid search, the linear baseline, and reporting.

The single score used everywhere is the coefficient of determination R^2.
The baseline is ordinary least squares via normal equations with a tiny
ridge jitter for rank safety; it exists to be beaten, not tuned.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import CleanDataset, DatasetSplit
from .forest import ForestModel, Hyperparams, derive_seed, fit_forest, impurity_importance, predict_batch

DEFAULT_GRID = tuple(range(50, 501, 50))

# Relative ridge jitter applied to the normal equations.
RIDGE_JITTER = 1e-8


class EvaluationError(ValueError):
    pass


@dataclass(frozen=True)
class GridCandidate:
    n_estimators: int
    cv_r2: float
    seed: int


@dataclass(frozen=True)
class LinearBaseline:
    weights: np.ndarray
    intercept: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.weights + self.intercept


@dataclass(frozen=True)
class EvalReport:
    train_r2: float
    test_r2: float
    cv_r2: float
    chosen_n_estimators: int
    searched_grid: tuple[int, ...]
    correlations: dict[str, float | None]
    importances: dict[str, float]
    baseline_train_r2: float
    baseline_test_r2: float
    split_sizes: tuple[int, int, int]
    split_seed: int

    def to_dict(self) -> dict:
        return {
            "train_r2": self.train_r2,
            "test_r2": self.test_r2,
            "cv_r2": self.cv_r2,
            "chosen_n_estimators": self.chosen_n_estimators,
            "searched_grid": list(self.searched_grid),
            "correlations": self.correlations,
            "importances": self.importances,
            "baseline": {"train_r2": self.baseline_train_r2, "test_r2": self.baseline_test_r2},
            "split": {
                "seed": self.split_seed,
                "ratios": [0.7, 0.2, 0.1],
                "sizes": {
                    "train": self.split_sizes[0],
                    "test": self.split_sizes[1],
                    "cv": self.split_sizes[2],
                },
            },
        }


def r2_score(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """1 - SS_res/SS_tot, with SS_tot about the mean of y_true."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    if y_true.shape != y_pred.shape:
        raise EvaluationError(
            f"length mismatch: {y_true.shape} true values vs {y_pred.shape} predictions"
        )
    if y_true.size < 2:
        raise EvaluationError("R^2 needs at least 2 observations")
    ss_tot = float(np.sum((y_true - y_true.mean()) ** 2))
    if ss_tot == 0.0:
        raise EvaluationError("undefined R^2: y_true is constant")
    ss_res = float(np.sum((y_true - y_pred) ** 2))
    return 1.0 - ss_res / ss_tot


def grid_search(
    X: np.ndarray,
    y: np.ndarray,
    train_idx: np.ndarray,
    cv_idx: np.ndarray,
    grid: Sequence[int] = DEFAULT_GRID,
    base_params: Hyperparams | None = None,
    master_seed: int = 0,
    n_jobs: int = 1,
) -> tuple[Hyperparams, list[GridCandidate]]:
    """Pick the tree count with the best cv R^2; ties go to the smaller count.

    Every candidate trains a fresh forest on the train slice with its own
    derived seed (recorded in the result), then scores on the cv slice.
    """
    if len(grid) == 0:
        raise EvaluationError("grid must contain at least one candidate")
    base = base_params or Hyperparams()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    candidates: list[GridCandidate] = []
    best: GridCandidate | None = None
    for i, n_estimators in enumerate(sorted(grid)):
        seed = derive_seed(master_seed, i)
        params = Hyperparams(
            n_estimators=n_estimators,
            max_features=base.max_features,
            min_samples_leaf=base.min_samples_leaf,
            max_depth=base.max_depth,
            bootstrap=base.bootstrap,
        )
        model = fit_forest(X[train_idx], y[train_idx], params, master_seed=seed, n_jobs=n_jobs)
        cand = GridCandidate(
            n_estimators=n_estimators,
            cv_r2=r2_score(y[cv_idx], predict_batch(model, X[cv_idx])),
            seed=seed,
        )
        candidates.append(cand)
        if best is None or cand.cv_r2 > best.cv_r2:
            best = cand
    chosen = Hyperparams(
        n_estimators=best.n_estimators,
        max_features=base.max_features,
        min_samples_leaf=base.min_samples_leaf,
        max_depth=base.max_depth,
        bootstrap=base.bootstrap,
    )
    return chosen, candidates


def fit_linear_baseline(X: np.ndarray, y: np.ndarray) -> LinearBaseline:
    """OLS by normal equations, jittered by RIDGE_JITTER * mean diagonal."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    if n <= p:
        raise EvaluationError(f"need more rows ({n}) than features ({p}) for OLS")
    A = np.hstack([X, np.ones((n, 1))])
    if np.linalg.matrix_rank(A) < p + 1:
        raise EvaluationError("design matrix is rank deficient beyond the ridge jitter")
    G = A.T @ A
    eps = RIDGE_JITTER * np.trace(G) / (p + 1)
    beta = np.linalg.solve(G + eps * np.eye(p + 1), A.T @ y)
    return LinearBaseline(weights=beta[:-1], intercept=float(beta[-1]))


def pearson(x: np.ndarray, y: np.ndarray) -> float | None:
    """Pearson correlation, or None when either side is constant."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    dx = x - x.mean()
    dy = y - y.mean()
    denom = float(np.sqrt(np.sum(dx * dx) * np.sum(dy * dy)))
    if denom == 0.0:
        return None
    return float(np.sum(dx * dy) / denom)


def feature_correlations(dataset: CleanDataset) -> dict[str, float | None]:
    """Pearson correlation of each encoded feature column with price."""
    y = dataset.target()
    X = dataset.feature_matrix()
    return {name: pearson(X[:, j], y) for j, name in enumerate(dataset.columns)}


def evaluate(
    model: ForestModel,
    dataset: CleanDataset,
    split: DatasetSplit,
    searched_grid: Sequence[int] | None = None,
) -> EvalReport:
    """Score a fitted model on all three slices and assemble the report.

    The forest is never refitted here. The linear baseline is a closed-form
    solve on the train slice, computed fresh because it is not part of the
    persisted model.
    """
    X = dataset.feature_matrix()
    y = dataset.target()
    baseline = fit_linear_baseline(X[split.train], y[split.train])
    importances = impurity_importance(model)
    grid = tuple(searched_grid) if searched_grid else (model.params.n_estimators,)
    return EvalReport(
        train_r2=r2_score(y[split.train], predict_batch(model, X[split.train])),
        test_r2=r2_score(y[split.test], predict_batch(model, X[split.test])),
        cv_r2=r2_score(y[split.cv], predict_batch(model, X[split.cv])),
        chosen_n_estimators=model.params.n_estimators,
        searched_grid=grid,
        correlations=feature_correlations(dataset),
        importances={name: float(importances[j]) for j, name in enumerate(dataset.columns)},
        baseline_train_r2=r2_score(y[split.train], baseline.predict(X[split.train])),
        baseline_test_r2=r2_score(y[split.test], baseline.predict(X[split.test])),
        split_sizes=(len(split.train), len(split.test), len(split.cv)),
        split_seed=split.seed,
    )
