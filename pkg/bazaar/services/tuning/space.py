# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Joint hyperparameter spaces and their unit-hypercube encoding."""

import math

import numpy as np

from ...errors import OutOfRange


def format_key(key):
    step, name = key
    return '{}.{}'.format(step, name)


class HyperparamSpace(object):
    """An ordered collection of ``((step_index, name), HyperparamSpec)`` entries.

    Numeric and bool hyperparameters encode to one coordinate each, categorical ones
    to a one-hot block, so ``dimension`` is the sum of those widths.
    """

    def __init__(self, entries=()):
        self._entries = tuple((tuple(key), spec) for key, spec in entries)
        keys = [key for key, _ in self._entries]
        if len(set(keys)) != len(keys):
            raise ValueError("Hyperparameter space keys must be unique")
        self._index = dict(self._entries)

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries)

    def __contains__(self, key):
        return tuple(key) in self._index

    def __eq__(self, other):
        return isinstance(other, HyperparamSpace) and self._entries == other._entries

    def __hash__(self):
        return hash(self._entries)

    def __repr__(self):
        return 'HyperparamSpace({})'.format(', '.join(format_key(key) for key in self.keys))

    @property
    def keys(self):
        return [key for key, _ in self._entries]

    def spec(self, key):
        return self._index[tuple(key)]

    @staticmethod
    def width(spec):
        return len(spec.values) if spec.kind == 'categorical' else 1

    @property
    def dimension(self):
        return sum(self.width(spec) for _, spec in self._entries)

    def defaults(self):
        return {key: spec.default for key, spec in self._entries}

    def check(self, assignment):
        """Raises OutOfRange when a value of ``assignment`` is not feasible."""
        for key, spec in self._entries:
            if key in assignment and not spec.contains(assignment[key]):
                raise OutOfRange(key, assignment[key])

    def encode(self, assignment):
        """Maps an assignment covering the space onto a vector in [0, 1]^d."""
        vector = []
        for key, spec in self._entries:
            value = assignment[key]
            if not spec.contains(value):
                raise OutOfRange(key, value)
            if spec.kind == 'categorical':
                vector.extend(1.0 if candidate == value else 0.0 for candidate in spec.values)
            elif spec.kind == 'bool':
                vector.append(1.0 if value else 0.0)
            else:
                vector.append(_to_unit(spec, float(value)))
        return np.asarray(vector, dtype=np.float64)

    def decode(self, vector):
        """Maps a vector of dimension d back onto the nearest feasible assignment."""
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (self.dimension,):
            raise ValueError("Expected a vector of dimension {}, got shape {}".format(self.dimension, vector.shape))
        assignment, position = {}, 0
        for key, spec in self._entries:
            if spec.kind == 'categorical':
                block = vector[position:position + len(spec.values)]
                assignment[key] = spec.values[int(np.argmax(block))]
            elif spec.kind == 'bool':
                assignment[key] = bool(vector[position] >= 0.5)
            else:
                value = _from_unit(spec, float(np.clip(vector[position], 0.0, 1.0)))
                if spec.kind == 'int':
                    value = int(min(max(math.floor(value + 0.5), spec.lo), spec.hi))
                assignment[key] = value
            position += self.width(spec)
        return assignment

    def sample(self, rng):
        """Draws an assignment uniformly (log-uniformly for log-scaled specs)."""
        assignment = {}
        for key, spec in self._entries:
            if spec.kind in ('categorical', 'bool'):
                assignment[key] = spec.values[int(rng.integers(len(spec.values)))]
            elif spec.kind == 'int':
                if spec.scale == 'log':
                    value = _from_unit(spec, float(rng.random()))
                    assignment[key] = int(min(max(math.floor(value + 0.5), spec.lo), spec.hi))
                else:
                    assignment[key] = int(rng.integers(spec.lo, spec.hi + 1))
            else:
                assignment[key] = _from_unit(spec, float(rng.random()))
        return assignment

    def to_json(self):
        return [[key[0], key[1], spec.to_json()] for key, spec in self._entries]


def _to_unit(spec, value):
    if spec.hi == spec.lo:
        return 0.0
    if spec.scale == 'log':
        return (math.log(value) - math.log(spec.lo)) / (math.log(spec.hi) - math.log(spec.lo))
    return (value - spec.lo) / (spec.hi - spec.lo)


def _from_unit(spec, unit):
    if spec.scale == 'log':
        return float(math.exp(math.log(spec.lo) + unit * (math.log(spec.hi) - math.log(spec.lo))))
    return float(spec.lo + unit * (spec.hi - spec.lo))


def assignment_to_json(assignment):
    """Serializes an assignment as a sorted list of ``[step_index, name, value]`` triples."""
    return [[step, name, value] for (step, name), value in sorted(assignment.items())]


def assignment_from_json(triples):
    return {(int(step), name): value for step, name, value in triples}
