# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Template selectors with a compute_rewards/select interface.

Arms are template ids.  A selector keeps the raw score of every pull and turns
them into rewards in [0, 1] at selection time, either against fixed bounds (the
metric's theoretical range) or against the running min/max of all scores seen so
far in the task.  Failed pulls are stored as None and count as reward 0.
"""

import math

from dataclasses import dataclass, field, replace

import numpy as np

SELECTOR_KINDS = ('ucb1', 'random')
SELECTOR_ALIASES = {
    'uniform': 'random',
    'uniformrandom': 'random',
}


def canonical_selector_kind(kind):
    kind = SELECTOR_ALIASES.get(kind.lower(), kind.lower())
    if kind not in SELECTOR_KINDS:
        raise ValueError("Unknown selector kind '{}'; expected one of {}".format(
            kind, ', '.join(sorted(set(SELECTOR_KINDS) | set(SELECTOR_ALIASES)))))
    return kind


def compute_rewards(scores, bounds):
    """Affine clamp of ``scores`` into [0, 1] with respect to ``bounds = (low, high)``.

    Order-preserving.  Degenerate bounds (``high <= low``) map every score to 0.5.
    """
    low, high = bounds
    scores = np.asarray(scores, dtype=np.float64)
    if not high > low:
        return [0.5] * len(scores)
    return [float(reward) for reward in np.clip((scores - low) / (high - low), 0.0, 1.0)]


@dataclass(frozen=True)
class SelectorState:
    kind: str = 'ucb1'
    seed: int = 0
    arms: dict = field(default_factory=dict)  # template id -> tuple of raw scores (None when failed)
    bounds: tuple = None  # fixed (low, high); None for the running range

    @property
    def total_pulls(self):
        return sum(len(scores) for scores in self.arms.values())

    def pulls(self, arm):
        return len(self.arms.get(arm, ()))

    def running_bounds(self):
        scores = [score for history in self.arms.values() for score in history if score is not None]
        if not scores:
            return (0.0, 0.0)
        return (min(scores), max(scores))

    def rewards(self, arm):
        """Rewards of every pull of ``arm``; failed pulls are 0."""
        history = self.arms.get(arm, ())
        bounds = self.bounds if self.bounds is not None else self.running_bounds()
        succeeded = [score for score in history if score is not None]
        rewards = iter(compute_rewards(succeeded, bounds))
        return [0.0 if score is None else next(rewards) for score in history]


def new_selector(kind='ucb1', seed=0, bounds=None):
    return SelectorState(kind=canonical_selector_kind(kind), seed=seed,
                         bounds=tuple(bounds) if bounds is not None else None)


def selector_record(state, arm, score):
    """Returns ``state`` with one more pull of ``arm``; ``score`` None marks a failure."""
    arms = dict(state.arms)
    arms[arm] = tuple(arms.get(arm, ())) + (None if score is None else float(score),)
    return replace(state, arms=arms)


def ucb1_index(mean, pulls, total):
    return mean + math.sqrt(2 * math.log(total) / pulls)


def select(state, candidates):
    """Chooses one of ``candidates``.

    UCB1 picks the first never-pulled candidate, otherwise the candidate with the
    highest ``mean + sqrt(2 ln N / n)``, ties going to the lowest index.  The random
    kind draws uniformly from a generator seeded with the seed and the pull count.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("select requires at least one candidate")
    if state.kind == 'random':
        rng = np.random.default_rng([state.seed, state.total_pulls])
        return candidates[int(rng.integers(len(candidates)))]

    for candidate in candidates:
        if state.pulls(candidate) == 0:
            return candidate
    total = state.total_pulls
    best, best_index = None, -math.inf
    for candidate in candidates:
        rewards = state.rewards(candidate)
        index = ucb1_index(sum(rewards) / len(rewards), len(rewards), total)
        if index > best_index:
            best, best_index = candidate, index
    return best


class Selector(object):
    """Mutable convenience wrapper around a SelectorState."""

    def __init__(self, kind='ucb1', seed=0, bounds=None):
        self.state = new_selector(kind, seed, bounds)

    def compute_rewards(self, scores):
        bounds = self.state.bounds if self.state.bounds is not None else self.state.running_bounds()
        return compute_rewards(scores, bounds)

    def record(self, arm, score):
        self.state = selector_record(self.state, arm, score)

    def select(self, candidates):
        return select(self.state, candidates)
