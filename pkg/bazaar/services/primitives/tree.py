# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""CART decision trees stored as flat node arrays.

A tree is a set of parallel arrays indexed by node: ``feature`` (-1 at leaves),
``threshold``, ``left``, ``right`` and ``value`` (one row of targets per node).
Samples with ``x[feature] <= threshold`` go left.  Classification trees are grown
on one-hot targets, where the summed per-column variance equals the Gini impurity,
so one splitting criterion serves both problem types.
"""

import math

import numpy as np

from ...errors import DegenerateInput, ShapeMismatch
from .preprocessing import as_labels
from .registry import BasePrimitive, as_matrix, register_primitive

TREE_FIELDS = ('feature', 'threshold', 'left', 'right', 'value')


def _impurity(sums, squares, counts):
    return (squares - sums ** 2 / counts[:, None]).sum(axis=1)


def best_split(X, Y, features, min_leaf):
    """Returns ``(gain, feature, threshold)`` of the best split of a node, or None.

    Ties go to the lowest feature index, then to the lowest threshold.
    """
    n = X.shape[0]
    total, total_sq = Y.sum(axis=0), (Y ** 2).sum(axis=0)
    parent = float((total_sq - total ** 2 / n).sum())
    best = None
    left_counts = np.arange(1, n, dtype=np.float64)
    right_counts = n - left_counts
    for feature in features:
        order = np.argsort(X[:, feature], kind='stable')
        xs, ys = X[order, feature], Y[order]
        sums, squares = np.cumsum(ys, axis=0)[:-1], np.cumsum(ys ** 2, axis=0)[:-1]
        children = (_impurity(sums, squares, left_counts) +
                    _impurity(total - sums, total_sq - squares, right_counts))
        valid = (xs[1:] > xs[:-1]) & (left_counts >= min_leaf) & (right_counts >= min_leaf)
        if not valid.any():
            continue
        gains = np.where(valid, parent - children, -np.inf)
        position = int(np.argmax(gains))
        gain = float(gains[position])
        if gain > 1e-12 and (best is None or gain > best[0]):
            best = (gain, int(feature), float((xs[position] + xs[position + 1]) / 2.0))
    return best


def grow_tree(X, Y, max_depth=None, min_leaf=1, max_features=None, rng=None):
    """Grows a CART tree on targets ``Y`` (n x k) and returns its node arrays.

    Parameters
    ----------
    X : ndarray (n, d)
    Y : ndarray (n, k)
        One-hot class indicators or regression targets.
    max_depth : int, optional
        Unbounded when None.
    min_leaf : int
        Minimum number of samples in each child of a split.
    max_features : int, optional
        Number of features drawn (without replacement, from ``rng``) at every node.
        All features are considered, without touching ``rng``, when None or >= d.
    rng : numpy.random.Generator, optional
    """
    n, d = X.shape
    if n == 0:
        raise DegenerateInput("Cannot grow a tree on zero rows")
    nodes = {field: [] for field in TREE_FIELDS}

    def add_node(rows):
        for field, value in zip(TREE_FIELDS, (-1, 0.0, -1, -1, Y[rows].mean(axis=0))):
            nodes[field].append(value)
        return len(nodes['feature']) - 1

    root = add_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        if (max_depth is not None and depth >= max_depth) or len(rows) < 2 * min_leaf:
            continue
        if max_features is None or max_features >= d:
            features = range(d)
        else:
            features = np.sort(rng.choice(d, size=max_features, replace=False))
        split = best_split(X[rows], Y[rows], features, min_leaf)
        if split is None:
            continue
        _, feature, threshold = split
        goes_left = X[rows, feature] <= threshold
        left, right = add_node(rows[goes_left]), add_node(rows[~goes_left])
        nodes['feature'][node], nodes['threshold'][node] = feature, threshold
        nodes['left'][node], nodes['right'][node] = left, right
        stack.append((right, rows[~goes_left], depth + 1))
        stack.append((left, rows[goes_left], depth + 1))

    return {
        'feature': np.asarray(nodes['feature'], dtype=np.int64),
        'threshold': np.asarray(nodes['threshold'], dtype=np.float64),
        'left': np.asarray(nodes['left'], dtype=np.int64),
        'right': np.asarray(nodes['right'], dtype=np.int64),
        'value': np.vstack(nodes['value']).astype(np.float64),
    }


def apply_tree(tree, X, offset=0):
    """Returns the leaf value row reached by every sample of ``X``."""
    feature, threshold = tree['feature'], tree['threshold']
    left, right = tree['left'], tree['right']
    position = np.full(X.shape[0], offset, dtype=np.int64)
    active = feature[position] >= 0
    rows = np.arange(X.shape[0])
    while active.any():
        current = position[active]
        goes_left = X[rows[active], feature[current]] <= threshold[current]
        position[active] = np.where(goes_left, left[current], right[current]) + offset
        active = feature[position] >= 0
    return tree['value'][position]


def stack_trees(trees):
    """Concatenates trees into one set of node arrays plus ``tree_offsets``."""
    offsets = np.cumsum([0] + [len(tree['feature']) for tree in trees[:-1]]).astype(np.int64)
    state = {field: np.concatenate([tree[field] for tree in trees]) for field in TREE_FIELDS}
    state['tree_offsets'] = offsets
    return state


def stacked_tree_values(state, X):
    """Leaf values of every stacked tree: an array of shape (n_trees, n, k)."""
    return np.stack([apply_tree(state, X, offset) for offset in np.atleast_1d(state['tree_offsets'])])


def one_hot(y):
    """Returns ``(classes, Y)`` where ``Y`` holds the indicator column of every class."""
    classes, codes = np.unique(as_labels(y), return_inverse=True)
    Y = np.zeros((len(codes), len(classes)), dtype=np.float64)
    Y[np.arange(len(codes)), codes] = 1.0
    return classes, Y


def check_rows(X, y):
    if X.shape[0] != len(y):
        raise ShapeMismatch("X has {} row(s) but y has {}".format(X.shape[0], len(y)))


def depth_hyperparam(hyperparams):
    depth = hyperparams.get('max_depth')
    return None if depth is None else int(depth)


def max_features_for(mode, fraction, n_features):
    """Number of features drawn per split for a feature-subsampling mode."""
    if mode == 'sqrt':
        return max(1, int(math.ceil(math.sqrt(n_features))))
    if mode == 'fraction':
        return max(1, int(round(fraction * n_features)))
    return None


@register_primitive()
class DecisionTreeClassifier(BasePrimitive):
    """CART classifier (Gini).  State: the node arrays plus ``classes``."""
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        classes, Y = one_hot(y)
        tree = grow_tree(X, Y, depth_hyperparam(hyperparams), int(hyperparams.get('min_leaf', 1)))
        tree['classes'] = classes
        return tree

    def produce(self, hyperparams, state, X):
        values = apply_tree(state, as_matrix(X))
        return {'y': np.atleast_1d(state['classes'])[np.argmax(values, axis=1)]}


@register_primitive()
class DecisionTreeRegressor(BasePrimitive):
    """CART regressor (variance reduction).  State: the node arrays."""
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        Y = np.asarray(y, dtype=np.float64).reshape(-1, 1)
        return grow_tree(X, Y, depth_hyperparam(hyperparams), int(hyperparams.get('min_leaf', 1)))

    def produce(self, hyperparams, state, X):
        return {'y': apply_tree(state, as_matrix(X))[:, 0]}
