"""Analytic prior covariance functions and their Monte Carlo validators.

For a constant intensity lambda over [C0, C1] the prior covariance of the
network output has the closed form

    cov(x1, x2) = sigma_b^2 + sigma_w^2
                  * exp(-s0^2 lambda^2 ((x1 - x2) / 2)^2)
                  * [Phi((C1 - xm) sqrt(2) s0 lambda) - Phi((C0 - xm) sqrt(2) s0 lambda)],

xm = (x1 + x2)/2. As the region grows the bracket tends to one, leaving a
squared-exponential kernel whose amplitude sigma_b^2 + sigma_w^2 does not
depend on lambda (decoupling): lambda acts purely as an inverse lengthscale.
The Monte Carlo validators estimate the same quantities from actual prior
function draws.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .intensity import HomogeneousIntensity, SGCPPrior, sigmoid
from .network import Hyperparams


def _std_normal_cdf(z):
    return 0.5 * erfc(-np.asarray(z, dtype=float) / np.sqrt(2.0))


def cov_homogeneous(x1, x2, hyper: Hyperparams, lam: float) -> float | np.ndarray:
    """Exact prior covariance under a constant intensity on hyper.region."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    c0, c1 = hyper.region
    s0 = np.sqrt(hyper.s0_sq)
    xm = 0.5 * (x1 + x2)
    se = np.exp(-hyper.s0_sq * lam**2 * (0.5 * (x1 - x2)) ** 2)
    band = _std_normal_cdf((c1 - xm) * np.sqrt(2.0) * s0 * lam) - _std_normal_cdf(
        (c0 - xm) * np.sqrt(2.0) * s0 * lam
    )
    out = hyper.sigma_b_sq + hyper.sigma_w_sq * se * band
    return float(out) if out.ndim == 0 else out


def cov_asymptotic(x1, x2, hyper: Hyperparams, lam: float) -> float | np.ndarray:
    """Large-region limit: bias variance plus a squared-exponential kernel."""
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    out = hyper.sigma_b_sq + hyper.sigma_w_sq * np.exp(
        -hyper.s0_sq * lam**2 * (0.5 * (x1 - x2)) ** 2
    )
    return float(out) if out.ndim == 0 else out


def cov_williams(x1, x2, sigma_c_sq: float, sigma_s_sq: float, amplitude: float = 1.0):
    """Covariance of an RBF network with Gaussian-distributed centers.

    Factorizes into a stationary squared-exponential part and a nonstationary
    envelope decaying away from the origin.
    """
    if sigma_c_sq <= 0 or sigma_s_sq <= 0:
        raise ValueError("variances must be positive")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    stat = np.exp(-((x1 - x2) ** 2) / (2.0 * (2.0 * sigma_s_sq + sigma_s_sq**2 / sigma_c_sq)))
    nonstat = np.exp(-(x1**2 + x2**2) / (2.0 * (2.0 * sigma_c_sq + sigma_s_sq)))
    out = amplitude * stat * nonstat
    return float(out) if out.ndim == 0 else out


def sample_prior_functions(
    hyper: Hyperparams, intensity, x_grid, n_samples: int, rng: np.random.Generator
) -> np.ndarray:
    """Matrix of n_samples prior function draws evaluated on x_grid.

    Vectorized across draws: all networks' units are pooled into flat arrays
    and summed back per draw, which keeps 1e4-draw validations fast.
    """
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if isinstance(intensity, SGCPPrior):
        counts = []
        centers = []
        lam_at = []
        for _ in range(n_samples):
            c, h, _, _ = intensity.sample_centers_with_h(rng)
            counts.append(c.size)
            centers.append(c)
            lam_at.append(intensity.lambda_star * sigmoid(h) if c.size else np.zeros(0))
        counts = np.array(counts)
        centers = np.concatenate(centers) if centers else np.zeros(0)
        lam = np.concatenate(lam_at) if lam_at else np.zeros(0)
    else:
        c0, c1 = intensity.region
        lam_max = intensity.max_value()
        cand_counts = rng.poisson(lam_max * (c1 - c0), size=n_samples)
        total = int(cand_counts.sum())
        cand = rng.uniform(c0, c1, size=total)
        keep = rng.uniform(size=total) < np.asarray(intensity.value(cand)) / lam_max
        owner_all = np.repeat(np.arange(n_samples), cand_counts)
        owner_kept = owner_all[keep]
        centers = cand[keep]
        counts = np.bincount(owner_kept, minlength=n_samples)
        order = np.argsort(owner_kept, kind="stable")
        centers = centers[order]
        lam = np.asarray(intensity.value(centers))
    scales = hyper.s0_sq * lam**2
    weights = rng.normal(0.0, np.sqrt(hyper.weight_prior_var), size=centers.size)
    biases = rng.normal(0.0, np.sqrt(hyper.sigma_b_sq), size=n_samples)
    owner = np.repeat(np.arange(n_samples), counts)
    out = np.tile(biases[:, None], (1, x_grid.size))
    for j, xq in enumerate(x_grid):
        contrib = weights * np.exp(-0.5 * scales * (xq - centers) ** 2)
        out[:, j] += np.bincount(owner, weights=contrib, minlength=n_samples)
    return out


@dataclass(frozen=True)
class CovEstimate:
    estimate: float
    std_error: float


def empirical_cov(
    hyper: Hyperparams,
    intensity,
    x1: float,
    x2: float,
    n_samples: int,
    rng: np.random.Generator,
    n_batches: int = 50,
) -> CovEstimate:
    """Sample covariance of (f(x1), f(x2)) over independent prior draws.

    The standard error comes from batch means over independent draws.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    f = sample_prior_functions(hyper, intensity, [x1, x2], n_samples, rng)
    a = f[:, 0] - f[:, 0].mean()
    b = f[:, 1] - f[:, 1].mean()
    est = float(np.sum(a * b) / (n_samples - 1))
    n_batches = max(2, min(n_batches, n_samples // 2))
    edges = np.linspace(0, n_samples, n_batches + 1).astype(int)
    batch = np.array(
        [np.mean(a[lo:hi] * b[lo:hi]) for lo, hi in zip(edges[:-1], edges[1:])]
    )
    se = float(batch.std(ddof=1) / np.sqrt(n_batches))
    return CovEstimate(est, se)


def variogram(
    hyper: Hyperparams,
    intensity,
    gaps,
    grid,
    n_samples: int = 10_000,
    rng: np.random.Generator | None = None,
) -> list[dict]:
    """Rows of (x, gap, cov, source, std_error) for cov(x - h/2, x + h/2).

    Constant intensities use the closed form; anything else falls back to
    Monte Carlo over prior draws (no closed form exists there).
    """
    rows = []
    analytic = isinstance(intensity, HomogeneousIntensity)
    for h in gaps:
        for x in grid:
            x1, x2 = x - h / 2.0, x + h / 2.0
            if analytic:
                cov = cov_homogeneous(x1, x2, hyper, intensity.level)
                rows.append({"x": float(x), "gap": float(h), "cov": float(cov), "source": "analytic", "std_error": 0.0})
            else:
                if rng is None:
                    raise ValueError("Monte Carlo variogram needs an rng")
                est = empirical_cov(hyper, intensity, x1, x2, n_samples, rng)
                rows.append({"x": float(x), "gap": float(h), "cov": est.estimate, "source": "mc", "std_error": est.std_error})
    return rows
