"""Wrapper classifier: a seeded random forest restricted to a column mask.

Individual trees are scikit-learn CART trees (Gini splits, per-node feature
subsampling).  Bootstrap resampling, per-tree seeding and the voting rule
live here so that results do not depend on how many trees are trained or on
the order in which they are trained.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from sklearn.tree import DecisionTreeClassifier


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 50
    max_depth: int = 12
    min_leaf: int = 2
    max_features: int | None = None  # None -> ceil(sqrt(selected columns))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")
        if self.min_leaf < 1:
            raise ValueError("min_leaf must be >= 1")

    def with_seed(self, seed: int) -> "ForestParams":
        return replace(self, seed=seed)


FAST_FOREST = ForestParams(n_trees=10, max_depth=8)


@dataclass(frozen=True, eq=False)
class ForestModel:
    trees: tuple[DecisionTreeClassifier, ...]
    mask: np.ndarray  # boolean, over the full width of X

    def leaf_votes(self) -> list[np.ndarray]:
        """Per tree, the (n_leaves, 2) array of training counts for classes 0 and 1."""
        out = []
        for tree in self.trees:
            t = tree.tree_
            leaves = t.children_left == -1
            frac = t.value[leaves, 0, :]
            counts = np.zeros((leaves.sum(), 2))
            for j, c in enumerate(tree.classes_):
                counts[:, int(c)] = frac[:, j] * t.weighted_n_node_samples[leaves]
            out.append(np.rint(counts))
        return out


def _tree_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1)[0])


def _fit_tree(Xm: np.ndarray, y: np.ndarray, p: ForestParams, n_feat: int, index: int):
    seed = _tree_seed(p.seed, index)
    if p.bootstrap:
        rng = np.random.default_rng(seed)
        idx = rng.integers(0, len(y), size=len(y))
        Xm, y = Xm[idx], y[idx]
    tree = DecisionTreeClassifier(
        criterion="gini",
        max_depth=p.max_depth,
        min_samples_leaf=p.min_leaf,
        max_features=n_feat,
        random_state=seed % (2**31),
    )
    return tree.fit(Xm, y)


def fit(X: np.ndarray, y: np.ndarray, p: ForestParams, mask: np.ndarray | None = None,
        workers: int = 1) -> ForestModel:
    """Train a forest on the columns of ``X`` selected by ``mask``.

    ``X`` is the full-width matrix; ``mask`` defaults to all columns.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    mask = np.ones(X.shape[1], dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
    if mask.shape != (X.shape[1],):
        raise ValueError("mask width does not match X")
    if not mask.any():
        raise ValueError("cannot fit a forest on an empty feature mask")
    if len(np.unique(y)) < 2:
        raise ValueError("training labels contain a single class")
    Xm = X[:, mask]
    n_feat = p.max_features or math.ceil(math.sqrt(Xm.shape[1]))
    n_feat = min(n_feat, Xm.shape[1])
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trees = tuple(pool.map(lambda i: _fit_tree(Xm, y, p, n_feat, i), range(p.n_trees)))
    else:
        trees = tuple(_fit_tree(Xm, y, p, n_feat, i) for i in range(p.n_trees))
    return ForestModel(trees=trees, mask=mask.copy())


def tree_votes(m: ForestModel, X: np.ndarray) -> np.ndarray:
    """Number of trees voting for class 1, per row."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != m.mask.shape[0]:
        raise ValueError(f"X has width {X.shape[-1]}, model expects {m.mask.shape[0]}")
    if X.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    Xm = X[:, m.mask]
    votes = np.zeros(X.shape[0], dtype=np.int64)
    for tree in m.trees:
        votes += (tree.predict(Xm) == 1)
    return votes


def predict(m: ForestModel, X: np.ndarray) -> np.ndarray:
    """Majority vote over trees; a tied vote goes to class 0."""
    votes = tree_votes(m, X)
    return (2 * votes > len(m.trees)).astype(np.int64)
