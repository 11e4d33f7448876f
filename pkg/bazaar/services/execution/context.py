# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""The key-value context through which pipeline steps exchange ML data objects."""

import numbers

from dataclasses import dataclass

import numpy as np
import pandas as pd


@dataclass(frozen=True)
class Provenance:
    """Where a context value came from."""
    step: int  # -1 for values supplied with the context
    phase: str  # 'source', 'fit' or 'produce'
    shape: tuple


def describe_value(value):
    """A short human-readable description of a value's kind, used in error messages."""
    if value is None:
        return 'nothing'
    if isinstance(value, pd.DataFrame):
        return 'table{}'.format(value.shape)
    if isinstance(value, np.ndarray):
        return '{}-d array of {}{}'.format(value.ndim, value.dtype, value.shape)
    return type(value).__name__


def _has_missing(array):
    if array.dtype.kind in 'fc':
        return not np.all(np.isfinite(array))
    if array.dtype == object:
        return any(cell is None or (isinstance(cell, float) and np.isnan(cell)) for cell in array.ravel())
    return False


def conforms(value, value_kind):
    """True if ``value`` is a valid instance of ``value_kind``.

    Tables may hold missing cells; matrices and vectors may not.
    """
    if value_kind == 'table':
        return isinstance(value, pd.DataFrame)
    if value_kind == 'matrix':
        return (isinstance(value, np.ndarray) and value.ndim == 2 and value.dtype.kind in 'biuf' and
                not _has_missing(value))
    if value_kind == 'vector':
        return isinstance(value, np.ndarray) and value.ndim == 1 and not _has_missing(value)
    if value_kind == 'scalar':
        return isinstance(value, (numbers.Number, str, np.generic)) and not isinstance(value, bool)
    if value_kind == 'label_list':
        if isinstance(value, np.ndarray):
            return value.ndim == 1
        return isinstance(value, (list, tuple))
    return False


def shape_of(value):
    shape = getattr(value, 'shape', None)
    if shape is not None:
        return tuple(shape)
    if isinstance(value, (list, tuple)):
        return (len(value),)
    return ()


class Context(object):
    """Named values plus a provenance record for each of them.

    Writing a name that already exists overwrites it: downstream steps always see
    the latest value.
    """

    def __init__(self, values=None):
        self._values = {}
        self._metadata = {}
        for name, value in (values or {}).items():
            self.set(name, value, step=-1, phase='source')

    @classmethod
    def from_dataset(cls, X, y=None):
        """A source context holding a feature table and, optionally, a target vector."""
        values = {'X': X}
        if y is not None:
            values['y'] = np.asarray(y)
        return cls(values)

    def __contains__(self, name):
        return name in self._values

    def __getitem__(self, name):
        return self._values[name]

    def __iter__(self):
        return iter(self._values)

    def __len__(self):
        return len(self._values)

    def get(self, name, default=None):
        return self._values.get(name, default)

    def set(self, name, value, step, phase):
        self._values[name] = value
        self._metadata[name] = Provenance(step=step, phase=phase, shape=shape_of(value))

    def names(self):
        return sorted(self._values)

    def metadata(self, name):
        return self._metadata[name]

    def copy(self):
        other = Context()
        other._values = dict(self._values)
        other._metadata = dict(self._metadata)
        return other

    def schema(self):
        """Name, value description and trailing shape of every value, sorted by name."""
        return [(name, type(self._values[name]).__name__, self._metadata[name].shape[1:]) for name in self.names()]

    def summary(self):
        """A JSON-friendly summary of the context (used by debug dumps)."""
        return {name: {'type': describe_value(self._values[name]),
                       'shape': list(self._metadata[name].shape),
                       'step': self._metadata[name].step,
                       'phase': self._metadata[name].phase}
                for name in self.names()}
