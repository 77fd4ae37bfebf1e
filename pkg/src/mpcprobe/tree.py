"""Greedy CART decision trees over 0/1 features and 0/1 labels.

Splits minimise weighted Gini impurity; ties go to the lowest feature
index.  Growth stops only when a node is pure, has fewer than two rows, or
no feature splits it (every feature is constant within the node).  There
is no depth limit and no pruning.

Many trees are grown at once, breadth-first: all rows of all trees are
grouped by node and each level is a handful of vectorised reductions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyTrainingSet, WidthMismatch

SCORE_EPSILON = 1e-10


@dataclass(frozen=True)
class DTree:
    """Flat tree; ``feature[k] < 0`` marks node ``k`` as a leaf; root is 0."""
    feature: np.ndarray
    child0: np.ndarray
    child1: np.ndarray
    value: np.ndarray
    n_features: int

    @property
    def n_nodes(self):
        return len(self.feature)

    @property
    def depth(self):
        depth = np.zeros(self.n_nodes, dtype=int)
        for k in range(self.n_nodes):  # children always follow their parent
            if self.feature[k] >= 0:
                depth[self.child0[k]] = depth[self.child1[k]] = depth[k] + 1
        return int(depth.max())

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise WidthMismatch(f"tree expects {self.n_features} features, got "
                                f"{X.shape[1] if X.ndim == 2 else X.shape}")
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return self.value[node].astype(np.uint8)
            go = X[rows[inner], f[inner]]
            node[inner] = np.where(go == 0, self.child0[node[inner]], self.child1[node[inner]])

    def paths(self):
        """Yield the feature sequence tested on each root-to-leaf path."""
        stack = [(0, ())]
        while stack:
            k, path = stack.pop()
            if self.feature[k] < 0:
                yield path
            else:
                f = int(self.feature[k])
                stack.append((int(self.child1[k]), path + (f,)))
                stack.append((int(self.child0[k]), path + (f,)))

    def __eq__(self, other):
        if not isinstance(other, DTree):
            return NotImplemented
        return (self.n_features == other.n_features
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ("feature", "child0", "child1", "value")))


def _weighted_gini(n, pos, c1, p1):
    """n * (weighted child Gini) for every (node, feature); inf if degenerate."""
    n0 = n[:, None] - c1
    p0 = pos[:, None] - p1
    with np.errstate(divide="ignore", invalid="ignore"):
        g = p0 * (n0 - p0) / n0 + p1 * (c1 - p1) / c1
    g[(n0 == 0) | (c1 == 0)] = np.inf
    return g


def train_trees(jobs) -> list[DTree]:
    """Grow one tree per ``(features, labels)`` job, all in one breadth-first pass."""
    jobs = [(np.asarray(X, dtype=np.uint8), np.asarray(y, dtype=np.uint8).ravel())
            for X, y in jobs]
    if not jobs:
        return []
    for X, y in jobs:
        if X.ndim != 2 or len(X) != len(y):
            raise WidthMismatch("features must be a 2-D matrix with one row per label")
        if len(y) == 0:
            raise EmptyTrainingSet("cannot train a tree on zero rows")
    width = max(X.shape[1] for X, _ in jobs)
    # pad narrower jobs with constant columns; those never split a node
    Xall = np.concatenate([np.pad(X, ((0, 0), (0, width - X.shape[1]))) for X, _ in jobs])
    Xall = Xall.astype(np.int32)
    yall = np.concatenate([y for _, y in jobs]).astype(np.int32)
    Xy = Xall * yall[:, None]
    offsets = np.cumsum([0] + [len(y) for _, y in jobs])

    # node storage, grown level by level (global ids)
    cap = 2 * len(yall) + len(jobs)
    feature = np.full(cap, -1, dtype=np.int64)
    child0 = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.uint8)
    tree_of = np.zeros(cap, dtype=np.int64)
    tree_of[:len(jobs)] = np.arange(len(jobs))
    n_nodes = len(jobs)
    node_of_row = np.repeat(np.arange(len(jobs)), np.diff(offsets))
    rows = np.arange(len(yall))

    while len(rows):
        order = np.argsort(node_of_row, kind="stable")
        rows, nodes = rows[order], node_of_row[order]
        starts = np.flatnonzero(np.r_[True, nodes[1:] != nodes[:-1]])
        ids = nodes[starts]
        n = np.diff(np.r_[starts, len(rows)])
        pos = np.add.reduceat(yall[rows], starts)
        value[ids] = 2 * pos > n
        impure = (pos > 0) & (pos < n) & (n >= 2)
        if not impure.any():
            break
        c1 = np.add.reduceat(Xall[rows], starts, axis=0)[impure]
        p1 = np.add.reduceat(Xy[rows], starts, axis=0)[impure]
        g = _weighted_gini(n[impure].astype(float), pos[impure].astype(float),
                           c1.astype(float), p1.astype(float))
        best = np.argmin(g, axis=1)
        ok = np.isfinite(g[np.arange(len(best)), best])
        split_ids = ids[impure][ok]
        if not len(split_ids):
            break
        kids = n_nodes + 2 * np.arange(len(split_ids))
        feature[split_ids] = best[ok]
        child0[split_ids] = kids
        tree_of[kids] = tree_of[kids + 1] = tree_of[split_ids]
        n_nodes += 2 * len(split_ids)
        keep = feature[nodes] >= 0
        rows, nodes = rows[keep], nodes[keep]
        node_of_row = child0[nodes] + Xall[rows, feature[nodes]]
    feature, child0 = feature[:n_nodes], child0[:n_nodes]
    child1 = np.where(feature >= 0, child0 + 1, -1)
    return _split_forest(feature, child0, child1, value[:n_nodes], tree_of[:n_nodes],
                         [X.shape[1] for X, _ in jobs])


def _split_forest(feature, child0, child1, value, tree_of, widths):
    trees = []
    for t, w in enumerate(widths):
        ids = np.flatnonzero(tree_of == t)
        local = np.full(len(feature), -1, dtype=np.int64)
        local[ids] = np.arange(len(ids))
        f = feature[ids]
        c0 = np.where(f >= 0, local[child0[ids]], -1)
        c1 = np.where(f >= 0, local[child1[ids]], -1)
        trees.append(DTree(f.astype(np.int64), c0, c1, value[ids], w))
    return trees


def train_tree(features, labels) -> DTree:
    """Fit one CART tree to a single label column."""
    return train_trees([(features, labels)])[0]


@dataclass(frozen=True)
class Forest:
    """One tree per label bit."""
    trees: tuple[DTree, ...]

    def predict(self, X) -> np.ndarray:
        if not self.trees:
            return np.zeros((len(X), 0), dtype=np.uint8)
        return np.stack([t.predict(X) for t in self.trees], axis=1)


def fit_forest(features, labels) -> Forest:
    labels = np.asarray(labels).reshape(len(labels), -1)
    return Forest(tuple(train_trees([(features, labels[:, j]) for j in range(labels.shape[1])])))


def score(model: Forest, features, labels) -> float:
    """Mispredicted label bits over all rows, plus a small epsilon."""
    labels = np.asarray(labels).reshape(len(labels), -1)
    if labels.shape[1] != len(model.trees):
        raise WidthMismatch(f"model predicts {len(model.trees)} label bits, "
                            f"got {labels.shape[1]}")
    pred = model.predict(features)
    return float(np.count_nonzero(pred != labels)) + SCORE_EPSILON
