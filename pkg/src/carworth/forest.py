"""Regression trees and a bagged forest of them, written on bare numpy.

Trees greedily maximize weighted variance reduction with thresholds at the
midpoints between consecutive distinct feature values. Ties break toward the
lower feature index, then the smaller threshold, so a fit is reproducible
bit for bit. Each tree draws an n-with-replacement bootstrap sample using a
private generator seeded by splitmix64(master seed, tree index); that makes
training embarrassingly parallel while staying byte-identical with any
worker count.

Trees are stored as flat arrays (feature == -1 marks a leaf) rather than
linked node objects: fully grown trees over a few hundred thousand rows have
that many nodes, and flat storage is what the model container serializes.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .dataset import CategoryVocab

SEED_MIXER = "splitmix64"
_GAMMA = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1


class ForestError(ValueError):
    pass


def derive_seed(master_seed: int, index: int) -> int:
    """splitmix64 output at stream position ``index + 1`` from ``master_seed``."""
    z = (master_seed + (index + 1) * _GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class Hyperparams:
    n_estimators: int = 500
    max_features: int = 9
    min_samples_leaf: int = 1
    max_depth: int | None = None
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ForestError("n_estimators must be at least 1")
        if self.max_features < 1:
            raise ForestError("max_features must be at least 1")
        if self.min_samples_leaf < 1:
            raise ForestError("min_samples_leaf must be at least 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ForestError("max_depth must be non-negative")

    def to_dict(self) -> dict:
        return {
            "n_estimators": self.n_estimators,
            "max_features": self.max_features,
            "min_samples_leaf": self.min_samples_leaf,
            "max_depth": self.max_depth,
            "bootstrap": self.bootstrap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Hyperparams":
        return cls(**d)


@dataclass(frozen=True)
class Tree:
    """One fitted tree in flat form; node 0 is the root."""

    feature: np.ndarray  # int16; -1 for leaves
    threshold: np.ndarray  # float64; 0.0 at leaves
    left: np.ndarray  # int32; -1 at leaves
    right: np.ndarray  # int32; -1 at leaves
    value: np.ndarray  # float64; mean target of the rows routed to the node
    n_samples: np.ndarray  # int32

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def root(self) -> "TreeNode":
        return TreeNode(self, 0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf value for every row of X (vectorized level-wise descent)."""
        idx = np.zeros(len(X), dtype=np.int32)
        active = np.flatnonzero(self.feature[idx] >= 0)
        while len(active):
            node = idx[active]
            go_left = X[active, self.feature[node]] <= self.threshold[node]
            idx[active] = np.where(go_left, self.left[node], self.right[node])
            active = active[self.feature[idx[active]] >= 0]
        return self.value[idx]


class TreeNode:
    """Cursor over a Tree's flat arrays, for inspection and tests."""

    __slots__ = ("tree", "index")

    def __init__(self, tree: Tree, index: int):
        self.tree = tree
        self.index = index

    @property
    def is_leaf(self) -> bool:
        return self.tree.feature[self.index] < 0

    @property
    def feature(self) -> int:
        return int(self.tree.feature[self.index])

    @property
    def threshold(self) -> float:
        return float(self.tree.threshold[self.index])

    @property
    def value(self) -> float:
        return float(self.tree.value[self.index])

    @property
    def n_samples(self) -> int:
        return int(self.tree.n_samples[self.index])

    @property
    def left(self) -> "TreeNode":
        return TreeNode(self.tree, int(self.tree.left[self.index]))

    @property
    def right(self) -> "TreeNode":
        return TreeNode(self.tree, int(self.tree.right[self.index]))


@dataclass(frozen=True)
class Prediction:
    price: float
    tree_min: float
    tree_max: float
    tree_std: float


@dataclass(frozen=True)
class ForestModel:
    """Immutable fitted ensemble plus the encoding schema it expects."""

    trees: tuple[Tree, ...]
    params: Hyperparams
    master_seed: int
    n_features: int
    impurity_decrease: np.ndarray  # float64 per feature, unnormalized
    vocab: CategoryVocab | None = None
    columns: tuple[str, ...] | None = None
    build_info: dict = field(default_factory=dict)

    @property
    def n_estimators(self) -> int:
        return len(self.trees)

    def with_schema(
        self, vocab: CategoryVocab, columns: Sequence[str], build_info: dict
    ) -> "ForestModel":
        return replace(self, vocab=vocab, columns=tuple(columns), build_info=build_info)


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    candidate_features: Sequence[int] | None = None,
    min_samples_leaf: int = 1,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, variance reduction) at a node, or None.

    The score maximized is sum(y_left)^2/n_left + sum(y_right)^2/n_right,
    an increasing affine transform of the variance reduction, evaluated at
    every midpoint between consecutive distinct sorted values.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ForestError("X must be 2-D with one row per target")
    sorted_idx = np.argsort(X, axis=0, kind="stable").astype(np.int32)
    candidates = None
    if candidate_features is not None:
        candidates = np.asarray(sorted(candidate_features), dtype=np.int64)
    _, found = _node_eval(X, y, sorted_idx, candidates, min_samples_leaf,
                          np.arange(X.shape[1]))
    if found is None:
        return None
    f, _, thr, reduction, _ = found
    return f, thr, reduction


def _node_eval(
    X: np.ndarray,
    y: np.ndarray,
    sorted_idx: np.ndarray,
    candidates: np.ndarray | None,
    min_leaf: int,
    all_feats: np.ndarray,
) -> tuple[float, tuple[int, int, float, float, np.ndarray] | None]:
    """Node mean plus the best split over every candidate column at once.

    ``sorted_idx`` holds, per feature, the node's row ids in that feature's
    sort order. The split half of the result is None when the node cannot
    or should not be split, otherwise (feature, boundary position,
    threshold, reduction, row ids sorted by the chosen feature).
    """
    m = sorted_idx.shape[0]
    if m == 0:
        return 0.0, None
    ys0 = y[sorted_idx[:, 0]]
    mean = float(ys0.mean())
    if m < 2 or m < 2 * min_leaf or ys0.min() == ys0.max():
        return mean, None
    if candidates is None:
        cols = sorted_idx
        feats = all_feats
    else:
        cols = sorted_idx[:, candidates]
        feats = candidates

    xs = X[cols, feats[None, :]]  # (m, k), each column sorted
    ys = y[cols]
    cums = np.cumsum(ys, axis=0)
    sums_left = cums[:-1]
    totals = cums[-1]
    sizes_left = np.arange(1, m, dtype=np.float64)[:, None]
    sizes_right = m - sizes_left
    score = sums_left * sums_left / sizes_left
    score += (totals - sums_left) * (totals - sums_left) / sizes_right
    ok = xs[:-1] != xs[1:]
    if min_leaf > 1:
        ok &= (sizes_left >= min_leaf) & (sizes_right >= min_leaf)
    score[~ok] = -np.inf

    # feature-major flattening makes argmax resolve ties toward the lower
    # feature index first, then the smaller threshold
    flat = score.T.ravel()
    j = int(np.argmax(flat))
    best_score = flat[j]
    if best_score == -np.inf:
        return mean, None
    k, i = divmod(j, m - 1)
    reduction = (best_score - totals[k] * totals[k] / m) / m
    if reduction <= 0:
        return mean, None
    split = (int(feats[k]), i, float((xs[i, k] + xs[i + 1, k]) / 2),
             float(reduction), cols[:, k])
    return mean, split


def _partition_sorted(sorted_idx: np.ndarray, side: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split every column of ``sorted_idx`` by the boolean ``side`` lookup,
    preserving each column's order (a stable partition keeps them sorted)."""
    p = sorted_idx.shape[1]
    sel = side[sorted_idx]
    m_left = int(np.count_nonzero(sel[:, 0]))
    cols = sorted_idx.T
    left = cols[sel.T].reshape(p, m_left).T
    right = cols[~sel.T].reshape(p, sorted_idx.shape[0] - m_left).T
    return left, right


def _grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    rows: np.ndarray,
    params: Hyperparams,
    feature_sampler: Callable[[], np.ndarray] | None,
) -> tuple[Tree, np.ndarray]:
    """Depth-first greedy growth; returns the tree and its impurity decrease.

    The node matrix is materialized once (bootstrap duplicates become
    distinct logical rows), each feature is sorted once at the root, and the
    sorted orders are partitioned down the tree instead of re-sorting at
    every node. An explicit stack is used because fully grown trees get
    deeper than the Python recursion limit; the left child is always
    expanded first so node order is deterministic.
    """
    Xn = np.ascontiguousarray(X[rows])
    yn = np.ascontiguousarray(y[rows])
    n_features = Xn.shape[1]
    all_feats = np.arange(n_features)
    min_leaf = params.min_samples_leaf
    root_sorted = np.argsort(Xn, axis=0, kind="stable").astype(np.int32)
    side = np.empty(len(yn), dtype=bool)  # per-tree scratch for partitioning

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    counts: list[int] = []
    decrease = np.zeros(n_features, dtype=np.float64)

    # stack entries: (per-feature sorted row ids, depth, parent id, is_right_child)
    stack: list[tuple[np.ndarray, int, int, bool]] = [(root_sorted, 0, -1, False)]
    while stack:
        node_sorted, depth, parent, is_right = stack.pop()
        node_id = len(feature)
        if parent >= 0:
            (right if is_right else left)[parent] = node_id
        m = node_sorted.shape[0]
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(m)

        if m == 1:
            value.append(float(yn[node_sorted[0, 0]]))
            continue
        if params.max_depth is not None and depth >= params.max_depth:
            value.append(float(yn[node_sorted[:, 0]].mean()))
            continue
        candidates = feature_sampler() if feature_sampler is not None else None
        mean, split = _node_eval(Xn, yn, node_sorted, candidates, min_leaf, all_feats)
        value.append(mean)
        if split is None:
            continue
        f, boundary, thr, reduction, ids_by_f = split
        feature[node_id] = f
        threshold[node_id] = thr
        decrease[f] += m * reduction
        # rows at or below the threshold are exactly the sorted prefix
        side[ids_by_f[:boundary + 1]] = True
        side[ids_by_f[boundary + 1:]] = False
        left_sorted, right_sorted = _partition_sorted(node_sorted, side)
        # push right first so the left child is materialized next
        stack.append((right_sorted, depth + 1, node_id, True))
        stack.append((left_sorted, depth + 1, node_id, False))

    tree = Tree(
        feature=np.asarray(feature, dtype=np.int16),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=np.asarray(value, dtype=np.float64),
        n_samples=np.asarray(counts, dtype=np.int32),
    )
    return tree, decrease


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    params: Hyperparams | None = None,
    rows: np.ndarray | None = None,
    feature_sampler: Callable[[], np.ndarray] | None = None,
) -> Tree:
    """Grow one tree on the given rows (all rows when omitted)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    params = params or Hyperparams(n_estimators=1, bootstrap=False)
    rows = np.arange(len(y)) if rows is None else np.asarray(rows)
    if len(rows) == 0:
        raise ForestError("cannot fit a tree on an empty row set")
    tree, _ = _grow_tree(X, y, rows, params, feature_sampler)
    return tree


def _fit_one(args: tuple) -> tuple[Tree, np.ndarray]:
    X, y, params, seed = args
    n = len(y)
    rng = np.random.Generator(np.random.PCG64(seed))
    rows = rng.integers(0, n, size=n) if params.bootstrap else np.arange(n)
    n_features = X.shape[1]
    k = min(params.max_features, n_features)
    sampler = None
    if k < n_features:
        # sorted so candidate order (and thus tie-breaking) is by feature index
        sampler = lambda: np.sort(rng.choice(n_features, size=k, replace=False))
    return _grow_tree(X, y, rows, params, sampler)


# Worker-side cache so the training matrix is shipped once per worker, not
# once per tree.
_worker_data: dict = {}


def _init_worker(X, y):
    _worker_data["X"] = X
    _worker_data["y"] = y


def _fit_one_in_worker(args: tuple) -> tuple[Tree, np.ndarray]:
    params, seed = args
    return _fit_one((_worker_data["X"], _worker_data["y"], params, seed))


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    params: Hyperparams | None = None,
    master_seed: int = 0,
    n_jobs: int = 1,
) -> ForestModel:
    """Fit ``params.n_estimators`` trees on bootstrap samples of (X, y).

    The result is identical for any ``n_jobs``: every tree's randomness comes
    from its own generator seeded by ``derive_seed(master_seed, i)``.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise ForestError("X must be 2-D with one row per target")
    if len(y) < 2:
        raise ForestError(f"need at least 2 rows to fit a forest, got {len(y)}")
    params = params or Hyperparams()
    seeds = [derive_seed(master_seed, i) for i in range(params.n_estimators)]

    if n_jobs in (0, -1):
        n_jobs = os.cpu_count() or 1
    if n_jobs == 1:
        results = [_fit_one((X, y, params, s)) for s in seeds]
    else:
        with ProcessPoolExecutor(
            max_workers=n_jobs, initializer=_init_worker, initargs=(X, y)
        ) as pool:
            results = list(pool.map(_fit_one_in_worker, [(params, s) for s in seeds]))

    trees = tuple(t for t, _ in results)
    decrease = np.sum([d for _, d in results], axis=0)
    return ForestModel(
        trees=trees,
        params=params,
        master_seed=master_seed,
        n_features=X.shape[1],
        impurity_decrease=decrease,
    )


def _tree_values(model: ForestModel, x: np.ndarray) -> np.ndarray:
    values = np.empty(model.n_estimators, dtype=np.float64)
    for t, tree in enumerate(model.trees):
        node = 0
        while tree.feature[node] >= 0:
            if x[tree.feature[node]] <= tree.threshold[node]:
                node = tree.left[node]
            else:
                node = tree.right[node]
        values[t] = tree.value[node]
    return values


def predict(model: ForestModel, x: Sequence[float]) -> Prediction:
    """Average the trees' leaf values for one feature vector."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.n_features,):
        raise ForestError(
            f"feature vector has arity {x.shape}, expected ({model.n_features},)"
        )
    values = _tree_values(model, x)
    return Prediction(
        price=float(np.mean(values)),
        tree_min=float(values.min()),
        tree_max=float(values.max()),
        tree_std=float(values.std()),
    )


def predict_batch(model: ForestModel, X: np.ndarray, chunk_rows: int = 8192) -> np.ndarray:
    """Forest mean for every row of X; chunked to bound the (trees x rows) buffer."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ForestError(
            f"feature matrix has shape {X.shape}, expected (n, {model.n_features})"
        )
    out = np.empty(len(X), dtype=np.float64)
    for start in range(0, len(X), chunk_rows):
        chunk = X[start:start + chunk_rows]
        per_tree = np.empty((model.n_estimators, len(chunk)), dtype=np.float64)
        for t, tree in enumerate(model.trees):
            per_tree[t] = tree.apply(chunk)
        out[start:start + chunk_rows] = np.mean(per_tree, axis=0)
    return out


def impurity_importance(model: ForestModel) -> np.ndarray:
    """Per-feature share of total variance reduction; sums to 1.

    A model with no splits anywhere has nothing to attribute, so the vector
    falls back to uniform.
    """
    total = model.impurity_decrease.sum()
    if total <= 0:
        return np.full(model.n_features, 1.0 / model.n_features)
    return model.impurity_decrease / total
