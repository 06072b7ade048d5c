"""Poisson-process intensities over the center region and prior sampling.

Three intensity variants share one interface: a constant level, a fixed
piecewise-linear function on a grid (also the plug-in form of an inferred
intensity), and the sigmoidal-GP construction lambda(c) = lambda* sigmoid(h(c))
with h drawn from a GP. Network centers follow a Poisson process with the
chosen intensity; scales are tied to the intensity at each center.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gp
from .network import Hyperparams, NetworkState

NEG_INF = float("-inf")


def sigmoid(z):
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PiecewiseLinearFn:
    """Piecewise-linear function on strictly increasing knots.

    Evaluation clamps to the endpoint values outside the knot range; the
    derivative is the segment slope, one-sided at the boundary knots and zero
    beyond them.
    """

    positions: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "positions", np.asarray(self.positions, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.positions.size < 2 or np.any(np.diff(self.positions) <= 0):
            raise ValueError("knot positions must be strictly increasing, length >= 2")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("knot values must be finite")

    def __call__(self, c):
        return np.interp(c, self.positions, self.values)

    def derivative(self, c):
        """Slope of the segment containing c (right-sided at interior knots)."""
        c = np.asarray(c, dtype=float)
        slopes = np.diff(self.values) / np.diff(self.positions)
        idx = np.clip(np.searchsorted(self.positions, c, side="right") - 1, 0, slopes.size - 1)
        out = slopes[idx]
        outside = (c < self.positions[0]) | (c > self.positions[-1])
        out = np.where(outside, 0.0, out)
        return out if out.ndim else float(out)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.positions))


class HomogeneousIntensity:
    """Constant intensity level over a bounded interval."""

    def __init__(self, level: float, region: tuple[float, float]):
        c0, c1 = float(region[0]), float(region[1])
        if not c0 < c1:
            raise ValueError("region must satisfy C0 < C1")
        if level <= 0:
            raise ValueError("intensity level must be positive")
        self.level = float(level)
        self.region = (c0, c1)

    def value(self, c):
        return np.full_like(np.asarray(c, dtype=float), self.level) if np.ndim(c) else self.level

    def log_value(self, c):
        return np.full_like(np.asarray(c, dtype=float), np.log(self.level)) if np.ndim(c) else float(np.log(self.level))

    def dlog_value(self, c):
        return np.zeros_like(np.asarray(c, dtype=float)) if np.ndim(c) else 0.0

    def total_mass(self) -> float:
        return self.level * (self.region[1] - self.region[0])

    def max_value(self) -> float:
        return self.level

    def sample_centers(self, rng: np.random.Generator) -> np.ndarray:
        k = rng.poisson(self.total_mass())
        return np.sort(rng.uniform(self.region[0], self.region[1], size=k))

    def with_level(self, level: float) -> "HomogeneousIntensity":
        return HomogeneousIntensity(level, self.region)


class GridIntensity:
    """Fixed positive intensity represented on a piecewise-linear grid.

    Also serves as the plug-in form of a Monte Carlo intensity estimate.
    """

    def __init__(self, fn: PiecewiseLinearFn, region: tuple[float, float] | None = None):
        if np.any(fn.values <= 0):
            raise ValueError("intensity values must be strictly positive")
        self.fn = fn
        if region is None:
            region = (float(fn.positions[0]), float(fn.positions[-1]))
        self.region = (float(region[0]), float(region[1]))

    def value(self, c):
        return self.fn(c)

    def log_value(self, c):
        return np.log(self.fn(c))

    def dlog_value(self, c):
        return self.fn.derivative(c) / self.fn(c)

    def total_mass(self) -> float:
        return self.fn.integral()

    def max_value(self) -> float:
        return float(self.fn.values.max())

    def sample_centers(self, rng: np.random.Generator) -> np.ndarray:
        # Exact: Poisson count at the envelope level, then thin.
        c0, c1 = self.region
        lam_max = self.max_value()
        n_cand = rng.poisson(lam_max * (c1 - c0))
        cand = rng.uniform(c0, c1, size=n_cand)
        keep = rng.uniform(size=n_cand) < self.value(cand) / lam_max
        return np.sort(cand[keep])


class SGCPPrior:
    """Sigmoid-GP Cox process prior: lambda(c) = lambda* sigmoid(h(c)), h ~ GP."""

    def __init__(self, lambda_star: float, gp_hyper: gp.GPHyper, region: tuple[float, float]):
        if lambda_star <= 0:
            raise ValueError("lambda_star must be positive")
        c0, c1 = float(region[0]), float(region[1])
        if not c0 < c1:
            raise ValueError("region must satisfy C0 < C1")
        self.lambda_star = float(lambda_star)
        self.gp_hyper = gp_hyper
        self.region = (c0, c1)

    def sample_centers_with_h(self, rng: np.random.Generator):
        """Thinning draw: returns (kept locations, h at kept, rejected, h at rejected)."""
        c0, c1 = self.region
        n_cand = rng.poisson(self.lambda_star * (c1 - c0))
        cand = np.sort(rng.uniform(c0, c1, size=n_cand))
        h = gp.sample_prior(cand, self.gp_hyper, rng)
        keep = rng.uniform(size=n_cand) < sigmoid(h)
        return cand[keep], h[keep], cand[~keep], h[~keep]

    def sample_centers(self, rng: np.random.Generator) -> np.ndarray:
        return self.sample_centers_with_h(rng)[0]


def scales_from_intensity(centers: np.ndarray, hyper: Hyperparams, intensity) -> np.ndarray:
    """Deterministic scale tie: s2_k = s0^2 * lambda(c_k)^2."""
    lam = np.asarray(intensity.value(np.asarray(centers, dtype=float)))
    return hyper.s0_sq * lam**2


def sample_prior_network(hyper: Hyperparams, intensity, rng: np.random.Generator) -> NetworkState:
    """Draw a full network from the generative prior under the given intensity."""
    if isinstance(intensity, SGCPPrior):
        centers, h_at, _, _ = intensity.sample_centers_with_h(rng)
        lam = intensity.lambda_star * sigmoid(h_at) if centers.size else np.zeros(0)
        scales = hyper.s0_sq * np.asarray(lam) ** 2
    else:
        centers = intensity.sample_centers(rng)
        scales = scales_from_intensity(centers, hyper, intensity)
    k = centers.size
    weights = rng.normal(0.0, np.sqrt(hyper.weight_prior_var), size=k)
    bias = rng.normal(0.0, np.sqrt(hyper.sigma_b_sq))
    return NetworkState(bias=bias, weights=weights, centers=centers, scales=scales)


def log_prior(state: NetworkState, hyper: Hyperparams, intensity) -> float:
    """Log density of the network under the prior, constants included.

    Returns -inf if any center falls outside the intensity region, so values
    are comparable across widths and usable as a support indicator.
    """
    c0, c1 = intensity.region
    centers = state.centers
    if centers.size and (centers.min() < c0 or centers.max() > c1):
        return NEG_INF
    out = -intensity.total_mass()
    if centers.size:
        out += float(np.sum(intensity.log_value(centers)))
        out += float(
            np.sum(-0.5 * np.log(2 * np.pi * hyper.weight_prior_var) - state.weights**2 / (2 * hyper.weight_prior_var))
        )
    out += -0.5 * np.log(2 * np.pi * hyper.sigma_b_sq) - state.bias**2 / (2 * hyper.sigma_b_sq)
    return float(out)


def sample_gamma_level(alpha: float, beta: float, rng: np.random.Generator) -> float:
    """Draw lambda with lambda^2 ~ Gamma(alpha, beta) in shape-rate form."""
    if alpha <= 0 or beta <= 0:
        raise ValueError("Gamma hyperparameters must be positive")
    return float(np.sqrt(rng.gamma(shape=alpha, scale=1.0 / beta)))


def default_region(x: np.ndarray, hyper: Hyperparams, mean_level: float) -> tuple[float, float]:
    """Data range padded by twice the prior lengthscale proxy 1/(s0*lambda)."""
    x = np.asarray(x, dtype=float)
    pad = 2.0 / (np.sqrt(hyper.s0_sq) * mean_level)
    return float(x.min() - pad), float(x.max() + pad)
