# Copyright (c) Bazaar Development Team.
# Distributed under the terms of the Modified BSD License.
"""Gaussian-process regression meta-model used by the GP tuners."""

import math
import os

from dataclasses import dataclass

import numpy as np

from scipy import linalg, optimize

from ...errors import NonFiniteScore, SingularKernel

GP_RESTARTS = int(os.getenv('BAZAAR_GP_RESTARTS', '3'))
GP_EVALUATIONS = int(os.getenv('BAZAAR_GP_EVALUATIONS', '50'))
GP_MAX_JITTER = float(os.getenv('BAZAAR_GP_MAX_JITTER', '1e-4'))

# log-parameter bounds: lengthscale, signal variance, noise variance
LOG_BOUNDS = np.log(np.array([[1e-2, 1e1], [1e-2, 1e2], [1e-8, 1e0]]))
INITIAL_PARAMS = (0.5, 1.0, 1e-4)


def squared_exponential(r, lengthscale, variance):
    return variance * np.exp(-r ** 2 / (2 * lengthscale ** 2))


def matern52(r, lengthscale, variance):
    scaled = math.sqrt(5) * r / lengthscale
    return variance * (1 + scaled + scaled ** 2 / 3) * np.exp(-scaled)


KERNELS = {
    'se': squared_exponential,
    'matern52': matern52,
}


def distances(A, B):
    """Euclidean distances between the rows of ``A`` and ``B``."""
    squared = ((np.asarray(A)[:, None, :] - np.asarray(B)[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(np.maximum(squared, 0.0))


def covariance(kernel, A, B, lengthscale, variance):
    return KERNELS[kernel](distances(A, B), lengthscale, variance)


def cholesky(K, noise):
    """Lower Cholesky factor of ``K + (noise + jitter) I`` and the jitter used.

    The jitter starts at 0 and grows tenfold from 1e-10 up to ``GP_MAX_JITTER``.
    """
    jitter = 0.0
    identity = np.eye(K.shape[0])
    while True:
        try:
            return linalg.cholesky(K + (noise + jitter) * identity, lower=True), jitter
        except linalg.LinAlgError:
            jitter = 1e-10 if jitter == 0.0 else jitter * 10
            if jitter > GP_MAX_JITTER * (1 + 1e-9):
                raise SingularKernel("Kernel matrix is not positive definite even with jitter {}".format(
                    GP_MAX_JITTER))


@dataclass(frozen=True)
class GPModel:
    X: np.ndarray
    y: np.ndarray  # normalised targets
    kernel: str
    lengthscale: float
    variance: float
    noise: float
    jitter: float
    y_mean: float
    y_scale: float
    factor: np.ndarray  # lower Cholesky factor of the noisy kernel matrix
    alpha: np.ndarray


def log_marginal_likelihood(X, y, kernel, lengthscale, variance, noise):
    """Log evidence of ``y`` under the GP; -inf when the kernel cannot be factorised."""
    try:
        factor, _ = cholesky(covariance(kernel, X, X, lengthscale, variance), noise)
    except SingularKernel:
        return -np.inf
    alpha = linalg.cho_solve((factor, True), y)
    return float(-0.5 * y @ alpha - np.log(np.diag(factor)).sum() - 0.5 * len(y) * math.log(2 * math.pi))


def maximise_evidence(objective, start, bounds, evaluations):
    """Maximises ``objective`` with bounded L-BFGS-B from ``start``.

    Returns ``(best_point, best_value)``; non-finite values are treated as a poor fit.
    """
    def negated(point):
        value = objective(point)
        return -value if np.isfinite(value) else 1e10

    start = np.clip(np.asarray(start, dtype=np.float64), bounds[:, 0], bounds[:, 1])
    result = optimize.minimize(negated, start, method='L-BFGS-B', bounds=[tuple(pair) for pair in bounds],
                               options={'maxfun': evaluations})
    point = np.clip(result.x, bounds[:, 0], bounds[:, 1])
    return point, objective(point)


def gp_fit(X, y, kernel='se', lengthscale=None, variance=None, noise=None, normalize=True, seed=0,
           restarts=GP_RESTARTS, evaluations=GP_EVALUATIONS, initial=INITIAL_PARAMS):
    """Fits a GP to trials ``(X, y)``.

    Kernel hyperparameters left as None are chosen by maximising the marginal
    likelihood with multi-start L-BFGS-B over their logarithms.

    Parameters
    ----------
    X : array (n, d)
        Encoded trial points.
    y : array (n,)
        Trial scores.
    kernel : str
        ``se`` or ``matern52``.
    normalize : bool
        Standardise ``y`` before fitting (predictions are mapped back).
    seed : int or sequence of int
        Seed of the random restarts.
    initial : tuple of float
        Starting lengthscale, signal variance and noise variance of the first restart.

    Returns
    -------
    GPModel
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if X.shape[0] == 0 or X.shape[0] != y.shape[0]:
        raise ValueError("gp_fit requires at least one trial and one score per trial")
    if not np.all(np.isfinite(y)):
        raise NonFiniteScore(y[~np.isfinite(y)][0])
    if kernel not in KERNELS:
        raise ValueError("Unknown kernel '{}'".format(kernel))

    y_mean, y_scale = 0.0, 1.0
    if normalize:
        y_mean = float(y.mean())
        y_scale = float(y.std()) or 1.0
    targets = (y - y_mean) / y_scale

    given = (lengthscale, variance, noise)
    free = [index for index, value in enumerate(given) if value is None]
    params = np.log([value if value is not None else initial for value, initial in zip(given, initial)])
    if free:
        def objective(point):
            candidate = params.copy()
            candidate[free] = point
            return log_marginal_likelihood(X, targets, kernel, *np.exp(candidate))

        rng = np.random.default_rng(seed)
        bounds = LOG_BOUNDS[free]
        starts = [params[free]] + [rng.uniform(bounds[:, 0], bounds[:, 1]) for _ in range(max(restarts, 1) - 1)]
        best, best_value = None, -np.inf
        for start in starts:
            point, value = maximise_evidence(objective, start, bounds, evaluations)
            if best is None or value > best_value:
                best, best_value = point, value
        params[free] = best

    lengthscale, variance, noise = (float(value) for value in np.exp(params))
    factor, jitter = cholesky(covariance(kernel, X, X, lengthscale, variance), noise)
    alpha = linalg.cho_solve((factor, True), targets)
    return GPModel(X=X, y=targets, kernel=kernel, lengthscale=lengthscale, variance=variance, noise=noise,
                   jitter=jitter, y_mean=y_mean, y_scale=y_scale, factor=factor, alpha=alpha)


def gp_predict(model, X):
    """Posterior mean and standard deviation of the latent function at the rows of ``X``."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    cross = covariance(model.kernel, X, model.X, model.lengthscale, model.variance)
    mu = cross @ model.alpha
    solved = linalg.solve_triangular(model.factor, cross.T, lower=True)
    var = np.maximum(model.variance - (solved ** 2).sum(axis=0), 0.0)
    return mu * model.y_scale + model.y_mean, np.sqrt(var) * model.y_scale
