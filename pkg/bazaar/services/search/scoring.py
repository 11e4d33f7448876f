# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Scorer functions.  Every score is oriented so that higher is better."""

import math

from dataclasses import dataclass

import numpy as np

from ...errors import ShapeMismatch


def accuracy(y_true, y_pred):
    return float(np.mean(np.asarray(y_true) == np.asarray(y_pred)))


def f1_macro(y_true, y_pred):
    """Unweighted mean of the per-class F1 over the classes present in either vector."""
    y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
    scores = []
    for label in np.union1d(y_true, y_pred):
        tp = np.sum((y_true == label) & (y_pred == label))
        fp = np.sum((y_true != label) & (y_pred == label))
        fn = np.sum((y_true == label) & (y_pred != label))
        scores.append(0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn))
    return float(np.mean(scores))


def mean_squared_error(y_true, y_pred):
    return float(np.mean((np.asarray(y_true, dtype=np.float64) - np.asarray(y_pred, dtype=np.float64)) ** 2))


def r2(y_true, y_pred):
    """Coefficient of determination; a constant target scores 1 when matched exactly, else 0."""
    y_true = np.asarray(y_true, dtype=np.float64)
    y_pred = np.asarray(y_pred, dtype=np.float64)
    residual = float(np.sum((y_true - y_pred) ** 2))
    total = float(np.sum((y_true - y_true.mean()) ** 2))
    if total == 0.0:
        return 1.0 if residual == 0.0 else 0.0
    return 1.0 - residual / total


@dataclass(frozen=True)
class ScorerFn:
    metric: str
    function: object
    higher_is_better: bool = True
    bounds: tuple = None  # theoretical range of the oriented score, when finite

    def __call__(self, y_true, y_pred):
        """Oriented score of ``y_pred`` against ``y_true``."""
        y_true, y_pred = np.asarray(y_true), np.asarray(y_pred)
        if y_true.shape != y_pred.shape:
            raise ShapeMismatch("Cannot score {} prediction(s) against {} target(s)".format(
                y_pred.shape, y_true.shape))
        if self.metric in ('mse', 'r2') and y_pred.dtype.kind not in 'biuf':
            raise ShapeMismatch("Regression predictions must be numeric, got {}".format(y_pred.dtype))
        score = self.function(y_true, y_pred)
        score = score if self.higher_is_better else -score
        return score if math.isfinite(score) else float('nan')

    def raw(self, score):
        """Undoes the orientation, e.g. to report a positive mean squared error."""
        return score if self.higher_is_better else -score


METRICS = {
    'accuracy': ScorerFn('accuracy', accuracy, True, (0.0, 1.0)),
    'f1_macro': ScorerFn('f1_macro', f1_macro, True, (0.0, 1.0)),
    'mse': ScorerFn('mse', mean_squared_error, False),
    'r2': ScorerFn('r2', r2, True),
}


def get_scorer(metric):
    try:
        return METRICS[metric]
    except KeyError:
        raise ValueError("Unknown metric '{}'; expected one of {}".format(metric, ', '.join(sorted(METRICS))))
