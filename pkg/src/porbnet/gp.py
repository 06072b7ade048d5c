"""Small Gaussian-process toolkit shared by the intensity machinery.

Squared-exponential kernel, jittered Cholesky factorization, and noiseless
conditioning. Everything works on 1-D location arrays.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class CholeskyError(RuntimeError):
    """Gram matrix stayed non-positive-definite through the jitter schedule."""


@dataclass(frozen=True)
class GPHyper:
    """Zero-mean GP hyperparameters for the latent intensity function."""

    kernel_variance: float = 1.0
    kernel_lengthscale: float = 1.0

    def __post_init__(self):
        if self.kernel_variance <= 0 or self.kernel_lengthscale <= 0:
            raise ValueError("GP kernel variance and lengthscale must be positive")


def se_kernel(a, b, hyper: GPHyper) -> np.ndarray:
    """Squared-exponential Gram matrix between location arrays a and b."""
    a = np.asarray(a, dtype=float).reshape(-1, 1)
    b = np.asarray(b, dtype=float).reshape(1, -1)
    return hyper.kernel_variance * np.exp(-0.5 * ((a - b) / hyper.kernel_lengthscale) ** 2)


def chol_with_jitter(gram: np.ndarray, kernel_variance: float) -> np.ndarray:
    """Lower Cholesky factor, escalating diagonal jitter 1e-10 -> 1e-6*variance."""
    n = gram.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    jitter = 1e-10
    cap = 1e-6 * kernel_variance
    while True:
        try:
            return np.linalg.cholesky(gram + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            jitter *= 10.0
            if jitter > cap:
                raise CholeskyError(
                    f"Cholesky failed for {n}x{n} Gram matrix even with jitter "
                    f"{cap:.1e} (kernel variance {kernel_variance:.3g})"
                )


def conditional(
    support_x: np.ndarray,
    support_h: np.ndarray,
    query_x: np.ndarray,
    hyper: GPHyper,
    chol: np.ndarray | None = None,
):
    """Noiseless GP conditional at query_x given exact values at support_x.

    Returns (mean, var) with var the pointwise conditional variance, floored
    at zero. Empty support falls back to the prior.
    """
    query_x = np.atleast_1d(np.asarray(query_x, dtype=float))
    if len(support_x) == 0:
        return np.zeros_like(query_x), np.full_like(query_x, hyper.kernel_variance)
    if chol is None:
        chol = chol_with_jitter(se_kernel(support_x, support_x, hyper), hyper.kernel_variance)
    k_sq = se_kernel(support_x, query_x, hyper)
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, np.asarray(support_h, dtype=float)))
    mean = k_sq.T @ alpha
    v = np.linalg.solve(chol, k_sq)
    var = hyper.kernel_variance - np.sum(v * v, axis=0)
    return mean, np.maximum(var, 0.0)


def sample_prior(locations: np.ndarray, hyper: GPHyper, rng: np.random.Generator) -> np.ndarray:
    """Joint draw of the GP at the given locations."""
    locations = np.asarray(locations, dtype=float)
    if locations.size == 0:
        return np.zeros(0)
    chol = chol_with_jitter(se_kernel(locations, locations, hyper), hyper.kernel_variance)
    return chol @ rng.standard_normal(locations.size)
