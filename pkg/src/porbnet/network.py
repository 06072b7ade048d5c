"""Radial basis function network state, densities, and analytic gradients.

The network output is

    f(x) = b + sum_k w_k * exp(-0.5 * s2_k * (x - c_k)^2),

with per-unit center c_k and squared inverse-lengthscale s2_k. The 1/2 in the
exponent is the convention under which the prior covariance admits the closed
form used throughout (asymptotic amplitude variance sigma_b^2 + sigma_w^2 with
per-weight prior variance sqrt(s0^2/pi) * sigma_w^2). Scales are never free
parameters: they are recomputed from the intensity at the centers, and the
center gradients carry the corresponding chain-rule term.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class Hyperparams:
    """Prior and noise hyperparameters shared across the model.

    weight_prior_var is derived: sqrt(s0_sq/pi) * sigma_w_sq, the per-weight
    prior variance that makes the asymptotic amplitude variance equal
    sigma_b_sq + sigma_w_sq exactly.
    """

    s0_sq: float = 1.0
    sigma_w_sq: float = 1.0
    sigma_b_sq: float = 1.0
    noise_var: float = 0.01
    region: tuple[float, float] = (-5.0, 5.0)
    gamma_alpha: float = 2.0
    gamma_beta: float = 2.0

    def __post_init__(self):
        for name in ("s0_sq", "sigma_w_sq", "sigma_b_sq", "noise_var", "gamma_alpha", "gamma_beta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")
        if not self.region[0] < self.region[1]:
            raise ValueError("region must satisfy C0 < C1")

    @property
    def weight_prior_var(self) -> float:
        return float(np.sqrt(self.s0_sq / np.pi) * self.sigma_w_sq)


@dataclass(frozen=True)
class NetworkState:
    """All parameters of a width-K network: bias, weights, centers, scales."""

    bias: float
    weights: np.ndarray
    centers: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "centers", np.asarray(self.centers, dtype=float))
        object.__setattr__(self, "scales", np.asarray(self.scales, dtype=float))
        k = self.weights.size
        if self.centers.size != k or self.scales.size != k:
            raise ValueError("weights, centers, scales must share length K")

    @property
    def width(self) -> int:
        return self.weights.size

    def validate(self, region: tuple[float, float]) -> None:
        if np.any(self.scales <= 0):
            raise ValueError("all scales must be strictly positive")
        if self.width and (self.centers.min() < region[0] or self.centers.max() > region[1]):
            raise ValueError("all centers must lie inside the region")


def basis(state: NetworkState, x) -> np.ndarray:
    """Unit responses, shape (n_points, K)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if state.width == 0:
        return np.zeros((x.size, 0))
    d = x[:, None] - state.centers[None, :]
    return np.exp(-0.5 * state.scales[None, :] * d * d)


def forward(state: NetworkState, x):
    """Network output at x (scalar in, scalar out; array in, array out)."""
    scalar = np.ndim(x) == 0
    phi = basis(state, x)
    out = state.bias + phi @ state.weights
    return float(out[0]) if scalar else out


def log_likelihood(state: NetworkState, x, y, noise_var: float) -> float:
    """Gaussian log likelihood of observations y at inputs x."""
    if noise_var <= 0:
        raise ValueError("noise_var must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.size == 0:
        return 0.0
    r = y - forward(state, x)
    return float(-0.5 * x.size * (LOG_2PI + np.log(noise_var)) - np.sum(r * r) / (2.0 * noise_var))


def log_full_conditional(state: NetworkState, x, y, hyper: Hyperparams, intensity) -> float:
    """Unnormalized log target for the network parameters given width K.

    likelihood x N(b) x prod_k N(w_k) x prod_k lambda(c_k); -inf outside the
    center support. The constant exp(-Lambda) of the point process is omitted
    (it does not involve the parameters).
    """
    c0, c1 = intensity.region
    if state.width and (state.centers.min() < c0 or state.centers.max() > c1):
        return float("-inf")
    out = log_likelihood(state, x, y, hyper.noise_var)
    out += -0.5 * state.bias**2 / hyper.sigma_b_sq
    if state.width:
        out += float(np.sum(-0.5 * state.weights**2 / hyper.weight_prior_var))
        out += float(np.sum(intensity.log_value(state.centers)))
    return out


def grad_log_posterior(state: NetworkState, x, y, hyper: Hyperparams, intensity):
    """Analytic gradient of log_full_conditional w.r.t. (bias, weights, centers).

    Scales are a deterministic function of the centers through the intensity,
    so each center gradient includes the chain-rule term via
    s2_k = s0^2 lambda(c_k)^2. At (or beyond) the region boundary the
    intensity's one-sided interpolation is used; support violations are the
    accept/reject step's job, not the gradient's.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    k = state.width
    if x.size:
        phi = basis(state, x)
        r = (y - forward(state, x)) / hyper.noise_var
        d_bias = float(np.sum(r))
        d_weights = phi.T @ r if k else np.zeros(0)
        if k:
            diff = x[:, None] - state.centers[None, :]
            dlog = np.asarray(intensity.dlog_value(state.centers))
            # d phi / d c_k = phi * s2 * (x - c) * (1 - (x - c) * dlog lambda)
            dphi_dc = phi * state.scales[None, :] * diff * (1.0 - diff * dlog[None, :])
            d_centers = (dphi_dc * state.weights[None, :]).T @ r
        else:
            d_centers = np.zeros(0)
    else:
        d_bias = 0.0
        d_weights = np.zeros(k)
        d_centers = np.zeros(k)
    d_bias += -state.bias / hyper.sigma_b_sq
    if k:
        d_weights = d_weights - state.weights / hyper.weight_prior_var
        d_centers = d_centers + np.asarray(intensity.dlog_value(state.centers))
    return d_bias, d_weights, d_centers
