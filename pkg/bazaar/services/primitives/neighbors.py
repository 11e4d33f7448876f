# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Nearest-neighbour classification."""

import numpy as np

from .registry import BasePrimitive, as_matrix, register_primitive
from .tree import check_rows, one_hot


@register_primitive()
class KNNClassifier(BasePrimitive):
    """k-nearest-neighbour vote under Euclidean distance.

    Equidistant neighbours are taken in training order and vote ties go to the
    lowest class.  ``weighting`` is ``uniform`` or ``distance`` (inverse distance).
    State: the training matrix ``X``, encoded labels ``codes`` and ``classes``.
    """
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        classes, Y = one_hot(y)
        return {'X': X, 'codes': np.argmax(Y, axis=1).astype(np.int64), 'classes': classes}

    def produce(self, hyperparams, state, X):
        X = as_matrix(X)
        train, codes = as_matrix(state['X']), np.atleast_1d(state['codes'])
        classes = np.atleast_1d(state['classes'])
        k = min(int(hyperparams.get('k', 5)), train.shape[0])
        distances = np.sqrt(((X[:, None, :] - train[None, :, :]) ** 2).sum(axis=2))
        neighbours = np.argsort(distances, axis=1, kind='stable')[:, :k]
        if hyperparams.get('weighting', 'uniform') == 'distance':
            weights = 1.0 / (np.take_along_axis(distances, neighbours, axis=1) + 1e-12)
        else:
            weights = np.ones(neighbours.shape)
        votes = np.zeros((X.shape[0], len(classes)))
        for column in range(k):
            np.add.at(votes, (np.arange(X.shape[0]), codes[neighbours[:, column]]), weights[:, column])
        return {'y': classes[np.argmax(votes, axis=1)]}
