# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Linear models trained by full-batch gradient descent.

Weights are packed as one vector: the ``d * k`` coefficients (row-major, shape
``(d, k)``) followed by the ``k`` intercepts.  The L2 penalty does not apply to
the intercepts.
"""

import numpy as np

from ...errors import DegenerateInput
from .registry import BasePrimitive, as_matrix, register_primitive
from .tree import check_rows, one_hot


def _unpack(w, d, k):
    return w[:d * k].reshape(d, k), w[d * k:]


def squared_loss_and_gradient(w, X, y, l2):
    """Mean half squared error plus ``l2 / 2 * ||coef||^2`` and its gradient."""
    n, d = X.shape
    coef, intercept = _unpack(w, d, 1)
    residual = X @ coef[:, 0] + intercept[0] - y
    loss = 0.5 * np.mean(residual ** 2) + 0.5 * l2 * np.sum(coef ** 2)
    gradient = np.concatenate([X.T @ residual / n + l2 * coef[:, 0], [np.mean(residual)]])
    return loss, gradient


def _softmax(scores):
    scores = scores - scores.max(axis=1, keepdims=True)
    exp = np.exp(scores)
    return exp / exp.sum(axis=1, keepdims=True)


def logistic_loss_and_gradient(w, X, Y, l2):
    """Mean softmax cross-entropy plus ``l2 / 2 * ||coef||^2`` and its gradient.

    ``Y`` holds one indicator column per class.
    """
    n, d = X.shape
    k = Y.shape[1]
    coef, intercept = _unpack(w, d, k)
    probabilities = _softmax(X @ coef + intercept)
    loss = -np.mean(np.sum(Y * np.log(np.clip(probabilities, 1e-300, None)), axis=1)) + 0.5 * l2 * np.sum(coef ** 2)
    delta = (probabilities - Y) / n
    gradient = np.concatenate([(X.T @ delta + l2 * coef).ravel(), delta.sum(axis=0)])
    return loss, gradient


def gradient_descent(loss_and_gradient, w, epochs, learning_rate):
    for _ in range(epochs):
        _, gradient = loss_and_gradient(w)
        w = w - learning_rate * gradient
    if not np.all(np.isfinite(w)):
        raise DegenerateInput("Gradient descent diverged (learning rate {})".format(learning_rate))
    return w


def _settings(hyperparams):
    return (float(hyperparams.get('learning_rate', 0.1)), float(hyperparams.get('l2', 0.0)),
            int(hyperparams.get('epochs', 200)))


@register_primitive()
class LinearRegressionGD(BasePrimitive):
    """Ridge-penalised least squares.  State: ``coef`` (d) and ``intercept``."""
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        y = np.asarray(y, dtype=np.float64)
        learning_rate, l2, epochs = _settings(hyperparams)
        w = gradient_descent(lambda w: squared_loss_and_gradient(w, X, y, l2),
                             np.zeros(X.shape[1] + 1), epochs, learning_rate)
        return {'coef': w[:-1], 'intercept': float(w[-1])}

    def produce(self, hyperparams, state, X):
        return {'y': as_matrix(X) @ np.atleast_1d(state['coef']) + float(state['intercept'])}


@register_primitive()
class LogisticRegressionGD(BasePrimitive):
    """Multinomial logistic regression.  State: ``coef`` (d x k), ``intercept`` (k) and ``classes``."""
    fit_args = ('X', 'y')
    produce_args = ('X',)
    produce_outputs = ('y',)

    def fit(self, hyperparams, rng, X, y):
        X = as_matrix(X)
        check_rows(X, y)
        classes, Y = one_hot(y)
        learning_rate, l2, epochs = _settings(hyperparams)
        d, k = X.shape[1], Y.shape[1]
        w = gradient_descent(lambda w: logistic_loss_and_gradient(w, X, Y, l2),
                             np.zeros(d * k + k), epochs, learning_rate)
        coef, intercept = _unpack(w, d, k)
        return {'coef': coef, 'intercept': intercept, 'classes': classes}

    def produce(self, hyperparams, state, X):
        X = as_matrix(X)
        coef = np.asarray(state['coef']).reshape(X.shape[1], -1)
        scores = X @ coef + np.atleast_1d(state['intercept'])
        return {'y': np.atleast_1d(state['classes'])[np.argmax(scores, axis=1)]}
