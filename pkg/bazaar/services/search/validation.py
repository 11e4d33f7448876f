# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""K-fold cross-validation of bound pipelines."""

import logging

import numpy as np

from ...errors import FoldDegenerate, SearchError
from ..execution.context import Context
from ..execution.engine import fit, produce
from .tasks import METRIC_PROBLEM_TYPES


def kfold_indices(y, k, seed=0, stratified=False):
    """Splits ``range(len(y))`` into ``k`` disjoint test folds.

    Indices are shuffled with ``seed`` and dealt round-robin into the folds; when
    stratified, each class is dealt in turn (in sorted class order) continuing
    from where the previous class stopped, so class proportions and fold sizes
    both stay balanced.  Returns a list of ``k`` sorted index arrays.
    """
    y = np.asarray(y)
    n = len(y)
    if k < 2:
        raise SearchError("Cross-validation needs at least 2 folds, got {}".format(k))
    if k > n:
        raise SearchError("Cannot split {} row(s) into {} folds".format(n, k))
    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    groups = [np.flatnonzero(y == label) for label in np.unique(y)] if stratified else [np.arange(n)]
    position = 0
    for group in groups:
        for index in rng.permutation(group):
            folds[position % k].append(int(index))
            position += 1
    return [np.array(sorted(fold), dtype=np.int64) for fold in folds]


def _degenerate(y, folds):
    labels = set(np.unique(y).tolist())
    for fold in folds:
        training = np.setdiff1d(np.arange(len(y)), fold)
        if set(np.unique(y[training]).tolist()) != labels:
            return True
    return False


def make_folds(y, k, seed=0, stratified=False):
    """Draws folds, re-drawing once when a training split would lack a class.

    A fold counts as missing a class when the rows outside it, which the pipeline is
    fitted on, do not hold every class.  Held-out folds of a class rarer than ``k``
    necessarily miss it, so they are not checked.

    Raises
    ------
    FoldDegenerate
        If the second draw is degenerate as well.
    """
    y = np.asarray(y)
    folds = kfold_indices(y, k, seed, stratified)
    if not stratified or not _degenerate(y, folds):
        return folds
    folds = kfold_indices(y, k, [seed, 1], stratified)
    if _degenerate(y, folds):
        raise FoldDegenerate("Every {}-fold split leaves a class out of a training split; "
                             "some class has fewer than 2 rows".format(k))
    return folds


def fit_and_score(pipeline, scorer, X_train, y_train, X_test, y_test, registry, seed=0, log=None):
    """Fits ``pipeline`` on the train rows and scores its predictions on the test rows.

    Returns ``(score, fitted)``.
    """
    fitted = fit(pipeline, Context.from_dataset(X_train, y_train), registry, seed=seed, log=log)
    output = produce(fitted, Context.from_dataset(X_test), registry, log=log)
    predictions = output[pipeline.graph.sink_inputs[0]]
    return scorer(y_test, predictions), fitted


def cross_validate_score(scorer, pipeline, X, y, k, seed=0, registry=None, folds=None, stratified=None,
                         log=None):
    """Mean and population standard deviation of the fold scores of ``pipeline``.

    Every fold fits the pipeline afresh on the other folds and scores the held-out
    fold.  Folds of classification metrics are stratified unless told otherwise.

    Parameters
    ----------
    scorer : ScorerFn
    pipeline : Pipeline
    X : pandas.DataFrame
    y : numpy.ndarray
    k : int
    seed : int
        Seeds the folds and every fold's fit.
    registry : NativeRegistry, optional
    folds : list of arrays, optional
        Precomputed test folds (``k`` is then ignored).

    Returns
    -------
    tuple of float
        ``(mean, sd)``.
    """
    log = log or logging.getLogger(__name__)
    if registry is None:
        from ..primitives.registry import default_registry
        registry = default_registry()
    y = np.asarray(y)
    if folds is None:
        if stratified is None:
            stratified = METRIC_PROBLEM_TYPES.get(scorer.metric) == 'classification'
        folds = make_folds(y, k, seed, stratified)
    scores = []
    for fold in folds:
        training = np.setdiff1d(np.arange(len(y)), fold)
        score, _ = fit_and_score(pipeline, scorer, X.iloc[training].reset_index(drop=True), y[training],
                                 X.iloc[fold].reset_index(drop=True), y[fold], registry, seed=seed, log=log)
        scores.append(score)
    scores = np.asarray(scores, dtype=np.float64)
    log.debug("Fold scores: {}".format(', '.join('{:.4f}'.format(score) for score in scores)))
    return float(scores.mean()), float(scores.std())
