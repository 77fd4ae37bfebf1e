import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mpcprobe.errors import EmptyTrainingSet, WidthMismatch
from mpcprobe.tree import SCORE_EPSILON, Forest, fit_forest, score, train_tree, train_trees


def reference_cart(X, y, rows=None):
    """Plain recursive CART with exact arithmetic, as a nested tuple.

    Leaf: ("leaf", bit).  Node: (feature, subtree_for_0, subtree_for_1).
    """
    rows = list(range(len(y))) if rows is None else rows
    n, pos = len(rows), sum(int(y[r]) for r in rows)
    if n < 2 or pos in (0, n):
        return ("leaf", int(2 * pos > n))
    best, best_f = None, None
    for f in range(X.shape[1]):
        part = [[r for r in rows if X[r, f] == b] for b in (0, 1)]
        if not part[0] or not part[1]:
            continue
        g = sum(Fraction(sum(int(y[r]) for r in p) * (len(p) - sum(int(y[r]) for r in p)),
                         len(p)) for p in part)
        if best is None or g < best:
            best, best_f = g, f
    if best_f is None:
        return ("leaf", int(2 * pos > n))
    part = [[r for r in rows if X[r, best_f] == b] for b in (0, 1)]
    return (best_f, reference_cart(X, y, part[0]), reference_cart(X, y, part[1]))


def as_nested(tree, k=0):
    if tree.feature[k] < 0:
        return ("leaf", int(tree.value[k]))
    return (int(tree.feature[k]), as_nested(tree, tree.child0[k]), as_nested(tree, tree.child1[k]))


def test_constant_labels_give_a_single_leaf():
    X = np.random.default_rng(0).integers(0, 2, (20, 4))
    t = train_tree(X, np.zeros(20))
    assert t.n_nodes == 1 and t.predict(X).sum() == 0


def test_label_equal_to_a_feature_gives_one_split():
    X = np.random.default_rng(1).integers(0, 2, (50, 6))
    t = train_tree(X, X[:, 3])
    assert t.depth == 1 and t.feature[0] == 3
    assert np.array_equal(t.predict(X), X[:, 3])


def all_depth2_trees(n_features):
    leaves = [("leaf", 0), ("leaf", 1)]
    d1 = leaves + [(f, a, b) for f in range(n_features) for a in leaves for b in leaves]
    return d1 + [(f, a, b) for f in range(n_features) for a in d1 for b in d1]


def nested_predict(t, row):
    while t[0] != "leaf":
        t = t[2] if row[t[0]] else t[1]
    return t[1]


def test_xor_of_two_features_needs_and_gets_depth_two():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]])
    y = X[:, 0] ^ X[:, 1]
    perfect = [t for t in all_depth2_trees(2)
               if all(nested_predict(t, r) == v for r, v in zip(X, y))]
    assert perfect and all(t[0] != "leaf" and t[1][0] != "leaf" for t in perfect)
    tree = train_tree(X, y)
    assert tree.depth == 2 and np.array_equal(tree.predict(X), y)


def test_majority_ties_go_to_zero():
    X = np.zeros((4, 2), dtype=np.uint8)  # nothing to split on
    t = train_tree(X, [0, 1, 1, 0])
    assert t.n_nodes == 1 and t.value[0] == 0
    assert train_tree(X, [0, 1, 1, 1]).value[0] == 1


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 60), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_matches_a_plain_recursive_cart(rows, features, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, (rows, features))
    y = rng.integers(0, 2, rows) if seed % 2 else X[:, 0] & X[:, -1]
    assert as_nested(train_tree(X, y)) == reference_cart(X, y)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 80), st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_paths_test_distinct_features_and_trees_are_deterministic(rows, features, seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, (rows, features))
    y = rng.integers(0, 2, rows)
    t = train_tree(X, y)
    assert all(len(set(p)) == len(p) for p in t.paths())
    assert train_tree(X.copy(), y.copy()) == t


def test_batched_training_equals_one_at_a_time():
    rng = np.random.default_rng(5)
    jobs = [(rng.integers(0, 2, (100, w)), rng.integers(0, 2, 100)) for w in (3, 9, 1, 9)]
    assert train_trees(jobs) == [train_tree(X, y) for X, y in jobs]


def test_score_counts_wrong_bits():
    X = np.eye(10, dtype=np.uint8)[:, :3]
    Y = np.zeros((10, 2), dtype=np.uint8)
    model = fit_forest(X, Y)
    assert score(model, X, Y) == SCORE_EPSILON
    assert score(model, X, 1 - Y) == 20 + SCORE_EPSILON
    with pytest.raises(WidthMismatch):
        score(model, X, Y[:, :1])
    with pytest.raises(WidthMismatch):
        model.predict(X[:, :2])


def test_constant_predictor_on_uniform_labels():
    rng = np.random.default_rng(11)
    model = fit_forest(np.zeros((8, 1)), np.zeros((8, 1)))
    labels = rng.integers(0, 2, (1000, 1))
    s = score(model, np.zeros((1000, 1)), labels)
    assert abs(s - 500) <= 3 * np.sqrt(1000 * 0.25)


def test_empty_training_set():
    with pytest.raises(EmptyTrainingSet):
        train_tree(np.zeros((0, 3)), np.zeros(0))


def test_forest_without_label_bits():
    f = Forest(())
    assert f.predict(np.zeros((4, 2))).shape == (4, 0)
