# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Transformers and glue primitives for single-table data."""

import numpy as np
import pandas as pd

from pandas.api.types import is_bool_dtype, is_numeric_dtype

from ...errors import DegenerateInput, ShapeMismatch
from .registry import BasePrimitive, as_matrix, register_primitive


def numeric_columns(table):
    return [column for column in table.columns
            if is_numeric_dtype(table[column]) and not is_bool_dtype(table[column])]


def categorical_columns(table):
    numeric = set(numeric_columns(table))
    return [column for column in table.columns if column not in numeric]


def as_labels(y):
    """Returns a label vector as a numpy array that can be stored without pickling."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ShapeMismatch("Labels must be 1-dimensional, got shape {}".format(y.shape))
    if y.dtype == object:
        y = y.astype(str)
    return y


def _strings(values):
    return np.array([str(value) for value in values], dtype=str)


def _mode(values):
    """Most frequent value; ties go to the smallest."""
    uniques, counts = np.unique(values, return_counts=True)
    return uniques[np.argmax(counts)]


def _require_table(X):
    if not isinstance(X, pd.DataFrame):
        raise ShapeMismatch("Expected a table, got {}".format(type(X).__name__))
    return X


def _require_columns(X, columns):
    missing = [column for column in columns if column not in X.columns]
    if missing:
        raise ShapeMismatch("Table is missing fitted column(s): {}".format(', '.join(missing)))


@register_primitive()
class SimpleImputer(BasePrimitive):
    """Fills missing cells: numeric columns per ``strategy``, categorical columns with their mode.

    State: ``numeric_columns``/``numeric_fill`` and ``categorical_columns``/``categorical_fill``.
    """
    fit_args = ('X',)
    produce_args = ('X',)
    produce_outputs = ('X',)

    def fit(self, hyperparams, rng, X):
        X = _require_table(X)
        strategy = hyperparams.get('strategy', 'mean')
        numeric, numeric_fill = numeric_columns(X), []
        for column in numeric:
            values = X[column].to_numpy(dtype=np.float64)
            values = values[~np.isnan(values)]
            if values.size == 0:
                numeric_fill.append(0.0)
            elif strategy == 'mean':
                numeric_fill.append(float(np.mean(values)))
            elif strategy == 'median':
                numeric_fill.append(float(np.median(values)))
            elif strategy == 'mode':
                numeric_fill.append(float(_mode(values)))
            else:
                raise DegenerateInput("Unknown imputation strategy '{}'".format(strategy))

        categorical, categorical_fill = categorical_columns(X), []
        for column in categorical:
            values = X[column][~X[column].isna()].astype(str).to_numpy()
            categorical_fill.append(str(_mode(values)) if values.size else '')

        return {
            'numeric_columns': _strings(numeric),
            'numeric_fill': np.asarray(numeric_fill, dtype=np.float64),
            'categorical_columns': _strings(categorical),
            'categorical_fill': _strings(categorical_fill),
        }

    def produce(self, hyperparams, state, X):
        X = _require_table(X).copy()
        numeric = [str(column) for column in state['numeric_columns']]
        categorical = [str(column) for column in state['categorical_columns']]
        _require_columns(X, numeric + categorical)
        for column, fill in zip(numeric, state['numeric_fill']):
            X[column] = pd.to_numeric(X[column], errors='coerce').fillna(float(fill)).astype(np.float64)
        for column, fill in zip(categorical, state['categorical_fill']):
            X[column] = X[column].where(~X[column].isna(), str(fill)).astype(object)
        return {'X': X}


@register_primitive()
class CategoricalEncoder(BasePrimitive):
    """One-hot encodes the ``max_labels`` most frequent labels of every categorical column.

    Encoded columns are appended after the numeric columns and named ``<column>=<label>``.
    Unseen or missing labels encode as all zeros.  State: ``columns``, the flattened
    ``labels`` and the per-column ``label_counts``.
    """
    fit_args = ('X',)
    produce_args = ('X',)
    produce_outputs = ('X',)

    def fit(self, hyperparams, rng, X):
        X = _require_table(X)
        max_labels = int(hyperparams.get('max_labels', 10))
        columns, labels, counts = [], [], []
        for column in categorical_columns(X):
            values = X[column][~X[column].isna()].astype(str)
            frequencies = sorted(values.value_counts().items(), key=lambda item: (-item[1], item[0]))
            kept = [label for label, _ in frequencies[:max_labels]]
            columns.append(column)
            labels.extend(kept)
            counts.append(len(kept))
        return {'columns': _strings(columns), 'labels': _strings(labels),
                'label_counts': np.asarray(counts, dtype=np.int64)}

    def produce(self, hyperparams, state, X):
        X = _require_table(X)
        columns = [str(column) for column in state['columns']]
        _require_columns(X, columns)
        encoded = X[[column for column in X.columns if column not in columns]].copy()
        offset = 0
        for column, count in zip(columns, state['label_counts']):
            values = X[column].astype(object).where(~X[column].isna(), None).to_numpy()
            for label in state['labels'][offset:offset + int(count)]:
                label = str(label)
                encoded['{}={}'.format(column, label)] = np.array(
                    [value is not None and str(value) == label for value in values], dtype=np.float64)
            offset += int(count)
        return {'X': encoded}


@register_primitive()
class TableToMatrix(BasePrimitive):
    """Extracts the numeric columns of a table as a float64 matrix."""
    produce_args = ('X',)
    produce_outputs = ('X',)

    def produce(self, hyperparams, state, X):
        if isinstance(X, pd.DataFrame):
            return {'X': X[numeric_columns(X)].to_numpy(dtype=np.float64)}
        return {'X': as_matrix(X)}


class _Scaler(BasePrimitive):
    fit_args = ('X',)
    produce_args = ('X',)
    produce_outputs = ('X',)

    @staticmethod
    def _check_width(X, offset):
        if X.shape[1] != offset.shape[0]:
            raise ShapeMismatch("Expected {} column(s), got {}".format(offset.shape[0], X.shape[1]))

    def produce(self, hyperparams, state, X):
        X = as_matrix(X)
        offset, scale = np.atleast_1d(state['offset']), np.atleast_1d(state['scale'])
        self._check_width(X, offset)
        safe = np.where(scale > 0, scale, 1.0)
        return {'X': np.where(scale > 0, (X - offset) / safe, 0.0)}

    def unscale(self, state, X):
        """Inverse transform for the non-degenerate columns."""
        X = as_matrix(X)
        offset, scale = np.atleast_1d(state['offset']), np.atleast_1d(state['scale'])
        self._check_width(X, offset)
        return X * scale + offset


@register_primitive()
class StandardScaler(_Scaler):
    """Centres every column on its mean and divides by its population standard deviation.

    Zero-variance columns produce 0.  State: ``offset`` (means) and ``scale`` (standard
    deviations).
    """

    def fit(self, hyperparams, rng, X):
        X = as_matrix(X)
        if X.shape[0] == 0:
            raise DegenerateInput("Cannot fit a scaler on zero rows")
        return {'offset': X.mean(axis=0), 'scale': X.std(axis=0)}


@register_primitive()
class MinMaxScaler(_Scaler):
    """Maps every column onto [0, 1] using its training minimum and maximum.

    Constant columns produce 0.  State: ``offset`` (minimums) and ``scale`` (ranges).
    """

    def fit(self, hyperparams, rng, X):
        X = as_matrix(X)
        if X.shape[0] == 0:
            raise DegenerateInput("Cannot fit a scaler on zero rows")
        lo = X.min(axis=0)
        return {'offset': lo, 'scale': X.max(axis=0) - lo}


@register_primitive()
class ClassEncoder(BasePrimitive):
    """Encodes labels as integers 0..k-1 in sorted label order; unseen labels encode as -1.

    The produce input is optional: without labels nothing is written.  State: ``classes``.
    """
    fit_args = ('y',)
    produce_args = ('y',)
    produce_outputs = ('y',)

    def fit(self, hyperparams, rng, y):
        return {'classes': np.unique(as_labels(y))}

    def produce(self, hyperparams, state, y=None):
        if y is None:
            return {}
        y = as_labels(y)
        classes = np.atleast_1d(state['classes'])
        positions = np.clip(np.searchsorted(classes, y), 0, len(classes) - 1)
        encoded = np.where(classes[positions] == y, positions, -1)
        return {'y': encoded.astype(np.int64)}


@register_primitive()
class ClassDecoder(BasePrimitive):
    """Maps integer predictions back onto the labels of ``classes``."""
    produce_args = ('y', 'classes')
    produce_outputs = ('y',)

    def produce(self, hyperparams, state, y, classes):
        classes = as_labels(np.atleast_1d(np.asarray(classes)))
        y = np.asarray(y)
        if y.size and (y.min() < 0 or y.max() >= len(classes)):
            raise ShapeMismatch("Predicted class index outside of [0, {})".format(len(classes)))
        return {'y': classes[y.astype(np.int64)]}


@register_primitive()
class UniqueCounter(BasePrimitive):
    """Emits the sorted set of distinct training labels.  State: ``classes``."""
    fit_args = ('y',)
    produce_args = ('y',)
    produce_outputs = ('classes',)

    def fit(self, hyperparams, rng, y):
        return {'classes': np.unique(as_labels(y))}

    def produce(self, hyperparams, state, y=None):
        return {'classes': np.atleast_1d(state['classes'])}
