"""Held-out metrics: marginal test log likelihood, RMSE, and upcrossing counts.

Upcrossings of a level on a grid proxy the inverse lengthscale of a function
prior; matching them across models gives comparable priors for baselines.
"""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp

from .network import LOG_2PI
from .sampler import Chain, predictive_matrix


class BracketError(RuntimeError):
    """Hyperparameter matching could not bracket the target."""


def test_log_likelihood(chain: Chain, x_test, y_test, noise_var: float | None = None) -> float:
    """Mean over test points of log mean_s N(y* | f_s(x*), noise_var).

    The inner mixture over chain samples is computed with log-sum-exp, so the
    result is finite for any finite inputs.
    """
    if len(chain) == 0:
        raise ValueError("chain has no samples")
    x_test = np.atleast_1d(np.asarray(x_test, dtype=float))
    y_test = np.atleast_1d(np.asarray(y_test, dtype=float))
    if x_test.size == 0:
        raise ValueError("empty test set")
    nv = chain.noise_var if noise_var is None else noise_var
    f = predictive_matrix(chain.samples, x_test)  # (S, n)
    log_dens = -0.5 * (LOG_2PI + np.log(nv)) - (y_test[None, :] - f) ** 2 / (2.0 * nv)
    per_point = logsumexp(log_dens, axis=0) - np.log(f.shape[0])
    return float(per_point.mean())


def rmse(chain: Chain, x_test, y_test) -> float:
    """Root mean squared error of the predictive mean on the test points."""
    if len(chain) == 0:
        raise ValueError("chain has no samples")
    x_test = np.atleast_1d(np.asarray(x_test, dtype=float))
    y_test = np.atleast_1d(np.asarray(y_test, dtype=float))
    mean = predictive_matrix(chain.samples, x_test).mean(axis=0)
    return float(np.sqrt(np.mean((y_test - mean) ** 2)))


def count_upcrossings(values, level: float = 0.0) -> int:
    """Number of grid transitions from <= level to > level."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.size < 2:
        return 0
    below = values[:-1] <= level
    above = values[1:] > level
    return int(np.sum(below & above))


def count_downcrossings(values, level: float = 0.0) -> int:
    """Number of grid transitions from > level to <= level."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    if values.size < 2:
        return 0
    return int(np.sum((values[:-1] > level) & (values[1:] <= level)))


def mean_upcrossings(function_matrix: np.ndarray, level: float = 0.0) -> float:
    """Average upcrossing count over rows of a (samples x grid) matrix."""
    f = np.atleast_2d(np.asarray(function_matrix, dtype=float))
    below = f[:, :-1] <= level
    above = f[:, 1:] > level
    return float(np.sum(below & above, axis=1).mean())


def match_prior_upcrossings(
    target_mean: float,
    candidate_mean,
    lo: float,
    hi: float,
    rel_tol: float = 0.05,
    max_iter: int = 60,
) -> float:
    """Bisect a scalar hyperparameter until the candidate's mean prior
    upcrossings matches the target within rel_tol.

    candidate_mean(value) must be a deterministic function (fix its sampling
    seed) and monotone over [lo, hi]; otherwise the bracket check fails.
    """
    if target_mean <= 0:
        raise ValueError("target mean upcrossings must be positive")
    g_lo = candidate_mean(lo) - target_mean
    g_hi = candidate_mean(hi) - target_mean
    if g_lo == 0.0:
        return lo
    if g_hi == 0.0:
        return hi
    if np.sign(g_lo) == np.sign(g_hi):
        raise BracketError(
            f"no bracket in [{lo}, {hi}]: offsets {g_lo:+.3f} and {g_hi:+.3f} "
            f"around target {target_mean:.3f}"
        )
    a, b = lo, hi
    ga = g_lo
    mid = 0.5 * (a + b)
    for _ in range(max_iter):
        mid = 0.5 * (a + b)
        gm = candidate_mean(mid) - target_mean
        if abs(gm) <= rel_tol * target_mean:
            return mid
        if np.sign(gm) == np.sign(ga):
            a, ga = mid, gm
        else:
            b = mid
    return mid
