import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fairsel import classifier
from fairsel.classifier import ForestModel, ForestParams


def best_stump_accuracy(X, y):
    """Best training accuracy over every axis-aligned depth-1 split with any leaf labels."""
    best = 0.0
    for j in range(X.shape[1]):
        values = np.unique(X[:, j])
        thresholds = [values[0] - 1] + [(a + b) / 2 for a, b in zip(values, values[1:])]
        for t in thresholds:
            left = X[:, j] <= t
            for lab_l, lab_r in itertools.product((0, 1), repeat=2):
                pred = np.where(left, lab_l, lab_r)
                best = max(best, float(np.mean(pred == y)))
    return best


def test_separable_single_feature():
    X = np.linspace(0, 1, 40)[:, None]
    y = (X[:, 0] > 0.5).astype(int)
    m = classifier.fit(X, y, ForestParams(n_trees=5, seed=1))
    assert np.mean(classifier.predict(m, X) == y) == 1.0


def test_xor_stump_bound():
    X = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
    y = np.array([0, 1, 1, 0])
    bound = best_stump_accuracy(X, y)
    assert bound == 0.5
    p = ForestParams(n_trees=1, max_depth=1, min_leaf=1, bootstrap=False, seed=0)
    m = classifier.fit(X, y, p)
    acc = np.mean(classifier.predict(m, X) == y)
    assert acc <= bound <= 0.75


def test_deterministic_for_seed(small_dataset):
    d = small_dataset
    p = ForestParams(n_trees=7, max_depth=4, seed=42)
    probe = np.random.default_rng(0).random((50, d.X.shape[1]))
    a = classifier.predict(classifier.fit(d.X, d.y, p), probe)
    b = classifier.predict(classifier.fit(d.X, d.y, p), probe)
    np.testing.assert_array_equal(a, b)


def test_parallel_fit_matches_sequential(small_dataset):
    d = small_dataset
    p = ForestParams(n_trees=9, max_depth=5, seed=3)
    seq = classifier.fit(d.X, d.y, p)
    par = classifier.fit(d.X, d.y, p, workers=4)
    np.testing.assert_array_equal(classifier.tree_votes(seq, d.X), classifier.tree_votes(par, d.X))


def test_adding_trees_keeps_earlier_trees(small_dataset):
    d = small_dataset
    few = classifier.fit(d.X, d.y, ForestParams(n_trees=3, seed=5))
    many = classifier.fit(d.X, d.y, ForestParams(n_trees=8, seed=5))
    for a, b in zip(few.trees, many.trees):
        np.testing.assert_array_equal(a.predict(d.X), b.predict(d.X))


def test_single_leaf_forest():
    X = np.zeros((4, 1))
    y = np.array([1, 1, 1, 0])
    m = classifier.fit(X, y, ForestParams(n_trees=1, bootstrap=False))
    assert m.trees[0].tree_.node_count == 1
    np.testing.assert_array_equal(m.leaf_votes()[0], [[1, 3]])
    np.testing.assert_array_equal(classifier.predict(m, np.random.rand(5, 1)), [1] * 5)


def test_tied_vote_goes_to_class_zero():
    X = np.zeros((4, 1))
    neg = classifier.fit(X, np.array([0, 0, 0, 1]), ForestParams(n_trees=1, bootstrap=False))
    pos = classifier.fit(X, np.array([1, 1, 1, 0]), ForestParams(n_trees=1, bootstrap=False))
    both = ForestModel(trees=neg.trees + pos.trees, mask=neg.mask)
    assert classifier.predict(both, np.zeros((3, 1))).tolist() == [0, 0, 0]


def test_empty_probe_set(small_dataset):
    m = classifier.fit(small_dataset.X, small_dataset.y, ForestParams(n_trees=2))
    assert classifier.predict(m, np.empty((0, small_dataset.X.shape[1]))).shape == (0,)


def test_errors(small_dataset):
    d = small_dataset
    with pytest.raises(ValueError, match="empty feature mask"):
        classifier.fit(d.X, d.y, ForestParams(), np.zeros(d.X.shape[1], bool))
    with pytest.raises(ValueError, match="single class"):
        classifier.fit(d.X, np.ones(len(d.y), int), ForestParams())
    m = classifier.fit(d.X, d.y, ForestParams(n_trees=2))
    with pytest.raises(ValueError, match="width"):
        classifier.predict(m, d.X[:, :2])
    with pytest.raises(ValueError):
        ForestParams(n_trees=0)


def test_leaf_votes_match_training_counts(small_dataset):
    d = small_dataset
    m = classifier.fit(d.X, d.y, ForestParams(n_trees=4, bootstrap=False, max_depth=3))
    for votes in m.leaf_votes():
        assert (votes >= 0).all()
        assert votes.sum() == len(d.y)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), col=st.integers(0, 4))
def test_masked_out_columns_are_ignored(seed, col):
    rng = np.random.default_rng(seed)
    X = rng.random((40, 5))
    y = (X[:, 0] > 0.5).astype(int)
    y[:2] = [0, 1]
    mask = np.array([True, True, False, True, False])
    m = classifier.fit(X, y, ForestParams(n_trees=3, seed=seed), mask)
    probe = rng.random((30, 5))
    perturbed = probe.copy()
    if not mask[col]:
        perturbed[:, col] = rng.random(30)
    else:
        perturbed[:, 2] = rng.random(30)
        perturbed[:, 4] = rng.random(30)
    np.testing.assert_array_equal(classifier.predict(m, probe), classifier.predict(m, perturbed))
    for tree in m.trees:
        used = tree.tree_.feature[tree.tree_.feature >= 0]
        assert set(np.flatnonzero(mask)[used]) <= set(np.flatnonzero(mask))
