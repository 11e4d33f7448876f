# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Tree ensembles: random forests and a light gradient-boosted trees learner."""

import numpy as np

from .registry import BasePrimitive, as_matrix, register_primitive
from .tree import (check_rows, depth_hyperparam, grow_tree, max_features_for, one_hot, stack_trees,
                   stacked_tree_values)


class _RandomForest(BasePrimitive):
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    def _grow(self, hyperparams, rng, X, Y):
        n_trees = int(hyperparams.get('n_trees', 10))
        bootstrap = bool(hyperparams.get('bootstrap', True))
        max_features = max_features_for(hyperparams.get('feature_subsampling', 'sqrt'),
                                        float(hyperparams.get('feature_fraction', 0.5)), X.shape[1])
        trees = []
        for _ in range(n_trees):
            rows = rng.integers(0, X.shape[0], size=X.shape[0]) if bootstrap else np.arange(X.shape[0])
            trees.append(grow_tree(X[rows], Y[rows], depth_hyperparam(hyperparams),
                                   int(hyperparams.get('min_leaf', 1)), max_features, rng))
        return stack_trees(trees)


@register_primitive()
class RandomForestClassifier(_RandomForest):
    """Bagged CART classifiers averaging leaf class frequencies.

    State: the stacked node arrays, ``tree_offsets`` and ``classes``.
    """

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        classes, Y = one_hot(y)
        state = self._grow(hyperparams, rng, X, Y)
        state['classes'] = classes
        return state

    def produce(self, hyperparams, state, X):
        probabilities = stacked_tree_values(state, as_matrix(X)).mean(axis=0)
        return {'y': np.atleast_1d(state['classes'])[np.argmax(probabilities, axis=1)]}


@register_primitive()
class RandomForestRegressor(_RandomForest):
    """Bagged CART regressors averaging leaf means.  State: stacked node arrays and ``tree_offsets``."""

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        return self._grow(hyperparams, rng, X, np.asarray(y, dtype=np.float64).reshape(-1, 1))

    def produce(self, hyperparams, state, X):
        return {'y': stacked_tree_values(state, as_matrix(X)).mean(axis=0)[:, 0]}


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def boost(X, target, n_rounds, learning_rate, max_depth, min_leaf, link=None):
    """Fits ``n_rounds`` regression trees to squared-error residuals.

    With ``link='sigmoid'`` the residuals are taken against the sigmoid of the additive
    score and the initial score is the logit of the target mean.

    Returns
    -------
    (float, list of dict)
        The initial score and the fitted trees.
    """
    if link == 'sigmoid':
        mean = np.clip(target.mean(), 1e-6, 1 - 1e-6)
        init = float(np.log(mean / (1 - mean)))
    else:
        init = float(target.mean())
    score = np.full(X.shape[0], init)
    trees = []
    for _ in range(n_rounds):
        prediction = _sigmoid(score) if link == 'sigmoid' else score
        residual = (target - prediction).reshape(-1, 1)
        tree = grow_tree(X, residual, max_depth, min_leaf)
        trees.append(tree)
        score = score + learning_rate * stacked_tree_values(stack_trees([tree]), X)[0, :, 0]
    return init, trees


class _GradientBoostedTrees(BasePrimitive):
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    @staticmethod
    def _settings(hyperparams):
        return (int(hyperparams.get('n_rounds', 30)), float(hyperparams.get('learning_rate', 0.1)),
                depth_hyperparam(hyperparams) or 3, int(hyperparams.get('min_leaf', 1)))

    @staticmethod
    def _scores(state, X, learning_rate):
        """Additive scores of every boosted model: an array of shape (n_models, n)."""
        n_rounds = int(state['n_rounds'])
        values = stacked_tree_values(state, X)[:, :, 0]
        init = np.atleast_1d(state['init'])
        return np.stack([init[model] + learning_rate * values[model * n_rounds:(model + 1) * n_rounds].sum(axis=0)
                         for model in range(len(init))])


@register_primitive()
class GradientBoostedTreesClassifier(_GradientBoostedTrees):
    """Boosted regression trees with a sigmoid link, one-vs-rest for more than two classes.

    A two-class problem fits one model for the second class.  State: stacked node
    arrays, ``tree_offsets``, ``init`` (one initial score per model), ``n_rounds``
    and ``classes``.
    """

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        n_rounds, learning_rate, max_depth, min_leaf = self._settings(hyperparams)
        classes, Y = one_hot(y)
        targets = [Y[:, 1]] if len(classes) == 2 else [Y[:, k] for k in range(len(classes))]
        inits, trees = [], []
        for target in targets:
            init, model_trees = boost(X, target, n_rounds, learning_rate, max_depth, min_leaf, link='sigmoid')
            inits.append(init)
            trees.extend(model_trees)
        state = stack_trees(trees) if trees else {'tree_offsets': np.zeros(0, dtype=np.int64)}
        state.update(init=np.asarray(inits, dtype=np.float64), n_rounds=n_rounds, classes=classes)
        return state

    def produce(self, hyperparams, state, X):
        X = as_matrix(X)
        classes = np.atleast_1d(state['classes'])
        if int(state['n_rounds']) == 0 or len(classes) == 1:
            scores = np.repeat(np.atleast_1d(state['init'])[:, None], X.shape[0], axis=1)
        else:
            scores = self._scores(state, X, self._settings(hyperparams)[1])
        if len(classes) == 2:
            return {'y': classes[(_sigmoid(scores[0]) > 0.5).astype(np.int64)]}
        return {'y': classes[np.argmax(_sigmoid(scores), axis=0)]}


@register_primitive()
class GradientBoostedTreesRegressor(_GradientBoostedTrees):
    """Boosted regression trees on squared error.

    State: stacked node arrays, ``tree_offsets``, ``init`` and ``n_rounds``.
    """

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        n_rounds, learning_rate, max_depth, min_leaf = self._settings(hyperparams)
        init, trees = boost(X, np.asarray(y, dtype=np.float64), n_rounds, learning_rate, max_depth, min_leaf)
        state = stack_trees(trees) if trees else {'tree_offsets': np.zeros(0, dtype=np.int64)}
        state.update(init=np.asarray([init], dtype=np.float64), n_rounds=n_rounds)
        return state

    def produce(self, hyperparams, state, X):
        X = as_matrix(X)
        if int(state['n_rounds']) == 0:
            return {'y': np.full(X.shape[0], float(np.atleast_1d(state['init'])[0]))}
        return {'y': self._scores(state, as_matrix(X), self._settings(hyperparams)[1])[0]}
