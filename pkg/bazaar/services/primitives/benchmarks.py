# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Synthetic objectives packaged as primitives, used to benchmark tuners."""

import numpy as np

from .registry import BasePrimitive, register_primitive

BRANIN_MINIMUM = 0.397887


def branin(x1, x2):
    """The two-dimensional Branin function over x1 in [-5, 10], x2 in [0, 15].

    Its global minimum, 0.397887, is reached at three points, among them (pi, 2.275).
    """
    b = 5.1 / (4 * np.pi ** 2)
    c = 5 / np.pi
    t = 1 / (8 * np.pi)
    return (x2 - b * x1 ** 2 + c * x1 - 6) ** 2 + 10 * (1 - t) * np.cos(x1) + 10


@register_primitive()
class BraninObjective(BasePrimitive):
    """Emits the negated Branin value of its ``x1``/``x2`` hyperparameters as ``score``."""
    produce_outputs = ('score',)

    def produce(self, hyperparams, state):
        return {'score': -float(branin(float(hyperparams['x1']), float(hyperparams['x2'])))}
