# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Native primitive implementations and the registry that resolves implementation keys."""

import abc
import io

from types import MappingProxyType

import numpy as np

from ...errors import DegenerateInput, UnimplementedPrimitive

_native_primitives = {}


def register_primitive(key=None):
    """Class decorator registering a native primitive under ``key`` (its class name by default)."""
    def decorator(primitive_class):
        _native_primitives[key or primitive_class.__name__] = primitive_class
        return primitive_class
    return decorator


class BasePrimitive(metaclass=abc.ABCMeta):
    """Base class of the native primitives.

    A primitive declares the names of its fit arguments, produce arguments and produce
    outputs.  The execution engine maps annotation I/O entries onto these names by
    position, so the lengths must match the primitive's annotation.

    ``fit`` returns the learned state as a flat dict of numpy arrays and scalars;
    ``produce`` returns a dict keyed by ``produce_outputs``.  An output may be left
    out of the returned dict only when its annotation entry is optional.
    """
    fit_args = ()
    produce_args = ()
    produce_outputs = ()

    def fit(self, hyperparams, rng, **inputs):
        return {}

    @abc.abstractmethod
    def produce(self, hyperparams, state, **inputs):
        pass

    @staticmethod
    def encode_state(state):
        """Encodes a state dict with ``numpy.savez`` (object arrays are refused)."""
        if not state:
            return b''
        buffer = io.BytesIO()
        np.savez(buffer, **{name: np.asarray(value) for name, value in state.items()})
        return buffer.getvalue()

    @staticmethod
    def decode_state(blob):
        if not blob:
            return {}
        with np.load(io.BytesIO(blob), allow_pickle=False) as archive:
            return {name: (archive[name].item() if archive[name].ndim == 0 else archive[name])
                    for name in archive.files}


class NativeRegistry(object):
    """Read-only mapping of implementation keys to native primitive instances."""

    def __init__(self, primitives):
        self._primitives = MappingProxyType({key: primitive_class() for key, primitive_class in primitives.items()})

    def __contains__(self, key):
        return key in self._primitives

    def __iter__(self):
        return iter(sorted(self._primitives))

    def __len__(self):
        return len(self._primitives)

    def get(self, key):
        try:
            return self._primitives[key]
        except KeyError:
            raise UnimplementedPrimitive(key)

    def fit(self, key, hyperparams, inputs, seed):
        """Runs the fit routine of ``key`` and returns its encoded state.

        Parameters
        ----------
        key : str
            The implementation key.
        hyperparams : dict
            Resolved hyperparameters of the step.
        inputs : dict
            Fit inputs keyed by the primitive's ``fit_args`` names.
        seed : int
            Seed of the step's random generator.

        Returns
        -------
        bytes
            The encoded state (empty for stateless primitives).
        """
        primitive = self.get(key)
        state = primitive.fit(hyperparams, np.random.default_rng(seed), **inputs)
        return primitive.encode_state(state)

    def produce(self, key, hyperparams, state, inputs):
        """Runs the produce routine of ``key`` against an encoded state."""
        primitive = self.get(key)
        return primitive.produce(hyperparams, primitive.decode_state(state), **inputs)


_default_registry = None


def default_registry():
    """The registry holding every bundled native primitive."""
    global _default_registry
    if _default_registry is None:
        from . import preprocessing, tree, ensemble, linear, neighbors, benchmarks  # noqa: F401
        _default_registry = NativeRegistry(_native_primitives)
    return _default_registry


def primitive_fit(key, hyperparams, inputs, seed, registry=None):
    return (registry or default_registry()).fit(key, hyperparams, inputs, seed)


def primitive_produce(key, hyperparams, state, inputs, registry=None):
    return (registry or default_registry()).produce(key, hyperparams, state, inputs)


def as_matrix(X, name='X'):
    """Returns ``X`` as a 2-d float64 array, refusing non-finite cells."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise DegenerateInput("'{}' must be 2-dimensional, got {} dimension(s)".format(name, X.ndim))
    return X
