# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Acquisition functions scoring candidate points from a GP posterior (maximisation)."""

import numpy as np

from scipy.stats import norm


def expected_improvement(mu, sigma, best, xi=0.0):
    """Closed-form expected improvement over ``best``.

    ``(mu - best - xi) * Phi(z) + sigma * phi(z)`` with ``z = (mu - best - xi) / sigma``,
    falling back to ``max(mu - best - xi, 0)`` where ``sigma`` is 0.  Never negative.
    """
    mu = np.asarray(mu, dtype=np.float64)
    sigma = np.asarray(sigma, dtype=np.float64)
    improvement = mu - best - xi
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(sigma > 0, improvement / np.where(sigma > 0, sigma, 1.0), 0.0)
        ei = np.where(sigma > 0, improvement * norm.cdf(z) + sigma * norm.pdf(z), np.maximum(improvement, 0.0))
    return np.maximum(ei, 0.0)


def posterior_mean(mu, sigma, best=None):
    return np.asarray(mu, dtype=np.float64)


ACQUISITIONS = {
    'ei': expected_improvement,
    'max': posterior_mean,
}
