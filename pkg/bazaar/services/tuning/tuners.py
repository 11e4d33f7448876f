# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Record/propose tuners over a template's hyperparameter space.

Tuner states are values: ``tuner_record`` returns a new state and
``tuner_propose`` derives its randomness from the state's seed and trial count, so
a sequence of records and proposals is reproducible.
"""

import math
import os

from dataclasses import dataclass, replace

import numpy as np

from ...errors import NonFiniteScore
from .acquisition import ACQUISITIONS
from .gaussian_process import INITIAL_PARAMS, gp_fit, gp_predict

GP_CANDIDATES = int(os.getenv('BAZAAR_GP_CANDIDATES', '1000'))
GP_WARMUP = int(os.getenv('BAZAAR_GP_WARMUP', '5'))

# kind -> (kernel, acquisition); None marks uniform random sampling
TUNER_KINDS = {
    'gp-se-ei': ('se', 'ei'),
    'gp-matern52-ei': ('matern52', 'ei'),
    'gp-max': ('se', 'max'),
    'random': (None, None),
}
TUNER_ALIASES = {
    'gp-ei': 'gp-se-ei',
    'uniform': 'random',
}


def canonical_tuner_kind(kind):
    kind = TUNER_ALIASES.get(kind.lower(), kind.lower())
    if kind not in TUNER_KINDS:
        raise ValueError("Unknown tuner kind '{}'; expected one of {}".format(
            kind, ', '.join(sorted(set(TUNER_KINDS) | set(TUNER_ALIASES)))))
    return kind


@dataclass(frozen=True)
class TrialRecord:
    assignment: dict
    x: tuple
    score: float
    wall_time: float = 0.0


@dataclass(frozen=True)
class TunerState:
    space: object
    kind: str = 'gp-se-ei'
    seed: int = 0
    trials: tuple = ()
    stale: bool = True
    lengthscale: float = INITIAL_PARAMS[0]
    variance: float = INITIAL_PARAMS[1]
    noise: float = INITIAL_PARAMS[2]

    @property
    def best_score(self):
        return max(trial.score for trial in self.trials) if self.trials else None


def new_tuner(space, kind='gp-se-ei', seed=0):
    return TunerState(space=space, kind=canonical_tuner_kind(kind), seed=seed)


def tuner_record(state, assignment, score, wall_time=0.0):
    """Returns ``state`` with one more trial; the GP is marked stale."""
    if isinstance(score, bool) or not isinstance(score, (int, float, np.floating)) or not math.isfinite(score):
        raise NonFiniteScore(score)
    x = tuple(state.space.encode(assignment))
    trial = TrialRecord(assignment=dict(assignment), x=x, score=float(score), wall_time=wall_time)
    return replace(state, trials=state.trials + (trial,), stale=True)


def _rng(state):
    return np.random.default_rng([state.seed, len(state.trials)])


def tuner_sample(state):
    """A uniform sample drawn from the same seeded stream as ``tuner_propose``."""
    return state.space.sample(_rng(state))


def _uses_gp(state, warmup):
    kernel, _ = TUNER_KINDS[state.kind]
    return kernel is not None and len(state.space) > 0 and len(state.trials) >= warmup


def _training_set(state):
    return (np.array([trial.x for trial in state.trials]),
            np.array([trial.score for trial in state.trials]))


def tuner_fit(state, warmup=GP_WARMUP):
    """Returns ``state`` with kernel hyperparameters re-fitted to its trials.

    The fit is warm-started from the state's current hyperparameters.  States that
    are fresh, still warming up or of the ``random`` kind are returned unchanged.
    """
    if not state.stale or not _uses_gp(state, warmup):
        return state
    X, y = _training_set(state)
    model = gp_fit(X, y, kernel=TUNER_KINDS[state.kind][0], seed=[state.seed, len(state.trials), 1],
                   initial=(state.lengthscale, state.variance, state.noise))
    return replace(state, stale=False, lengthscale=model.lengthscale, variance=model.variance, noise=model.noise)


def tuner_propose(state, candidates=GP_CANDIDATES, warmup=GP_WARMUP):
    """Proposes the next assignment to evaluate.

    The first ``warmup`` proposals (and every proposal of the ``random`` kind) are
    uniform samples.  Afterwards a GP with the state's hyperparameters (re-fitted
    first when the state is stale) is conditioned on all trials and the candidate
    with the highest acquisition among ``candidates`` uniform samples is returned,
    ties going to the earliest sample.
    """
    if len(state.space) == 0:
        return {}
    rng = _rng(state)
    if not _uses_gp(state, warmup):
        return state.space.sample(rng)

    state = tuner_fit(state, warmup)
    kernel, acquisition = TUNER_KINDS[state.kind]
    X, y = _training_set(state)
    model = gp_fit(X, y, kernel=kernel, lengthscale=state.lengthscale, variance=state.variance, noise=state.noise)
    sampled = [state.space.sample(rng) for _ in range(candidates)]
    mu, sigma = gp_predict(model, np.array([state.space.encode(assignment) for assignment in sampled]))
    values = ACQUISITIONS[acquisition](mu, sigma, float(y.max()))
    return sampled[int(np.argmax(values))]


class Tuner(object):
    """Mutable convenience wrapper around a TunerState."""

    def __init__(self, space, kind='gp-se-ei', seed=0):
        self.state = new_tuner(space, kind, seed)

    def record(self, assignment, score, wall_time=0.0):
        self.state = tuner_record(self.state, assignment, score, wall_time)

    def propose(self):
        self.state = tuner_fit(self.state)
        return tuner_propose(self.state)

    @property
    def trials(self):
        return self.state.trials
