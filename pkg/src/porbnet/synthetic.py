"""Synthetic regression tasks used by the experiment scripts and tests."""
from __future__ import annotations

import numpy as np

from .datasets import Dataset
from .intensity import GridIntensity, PiecewiseLinearFn, sample_prior_network
from .network import Hyperparams, NetworkState, forward


def sine_task(n: int = 60, noise_sd: float = 0.12, seed: int = 0) -> Dataset:
    """Noisy sine wave on [0, 1]: 2.25 periods, needs roughly 5-7 radial units."""
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.0, 1.0, size=n))
    y = np.sin(4.5 * np.pi * x) + noise_sd * rng.standard_normal(n)
    idx = rng.permutation(n)
    n_train = int(round(0.75 * n))
    return Dataset(
        x, y, train_idx=np.sort(idx[:n_train]), test_idx=np.sort(idx[n_train:]), name="sine"
    )


def step_intensity(
    region: tuple[float, float],
    inner: tuple[float, float],
    total_mass: float,
    boost: float = 5.0,
    n_knots: int = 201,
) -> GridIntensity:
    """Piecewise intensity `boost` times larger inside `inner` than elsewhere,
    scaled so the region integrates to total_mass. Smoothed onto a dense grid
    so the log-intensity gradient stays usable."""
    c0, c1 = region
    a, b = inner
    grid = np.linspace(c0, c1, n_knots)
    ramp = 0.02 * (c1 - c0)  # short linear ramps instead of jump discontinuities
    vals = np.ones(grid.size)
    vals += (boost - 1.0) * np.clip(
        np.minimum((grid - a) / ramp, (b - grid) / ramp), 0.0, 1.0
    )
    fn = PiecewiseLinearFn(grid, vals)
    scale = total_mass / fn.integral()
    return GridIntensity(PiecewiseLinearFn(grid, vals * scale), region)


def bump_intensity(
    region: tuple[float, float],
    base: float = 1.0,
    peak: float = 6.0,
    center: float | None = None,
    width: float | None = None,
    n_knots: int = 201,
) -> GridIntensity:
    """Smooth single-bump intensity: base level with a Gaussian ridge."""
    c0, c1 = region
    if center is None:
        center = 0.5 * (c0 + c1)
    if width is None:
        width = 0.12 * (c1 - c0)
    grid = np.linspace(c0, c1, n_knots)
    vals = base + (peak - base) * np.exp(-0.5 * ((grid - center) / width) ** 2)
    return GridIntensity(PiecewiseLinearFn(grid, vals), region)


def varying_lengthscale_task(
    hyper: Hyperparams,
    truth: GridIntensity,
    n: int = 120,
    noise_sd: float = 0.1,
    seed: int = 0,
    x_range: tuple[float, float] | None = None,
):
    """Data generated by a prior draw under a known nonconstant intensity.

    Returns (dataset, generating network). Redraws until the network has at
    least three units so there is wiggliness to recover.
    """
    rng = np.random.default_rng(seed)
    net = sample_prior_network(hyper, truth, rng)
    while net.width < 3:
        net = sample_prior_network(hyper, truth, rng)
    if x_range is None:
        pad = 0.1 * (truth.region[1] - truth.region[0])
        x_range = (truth.region[0] + pad, truth.region[1] - pad)
    x = np.sort(rng.uniform(x_range[0], x_range[1], size=n))
    y = forward(net, x) + noise_sd * rng.standard_normal(n)
    idx = rng.permutation(n)
    n_train = int(round(0.75 * n))
    data = Dataset(
        x, y, train_idx=np.sort(idx[:n_train]), test_idx=np.sort(idx[n_train:]), name="sgcp-truth"
    )
    return data, net


def fixed_network_task(n: int, seed: int = 0, noise_sd: float = 0.0):
    """Noise-free (or nearly) data from a fixed three-unit network on [0, 1]."""
    rng = np.random.default_rng(seed)
    net = NetworkState(
        bias=0.1,
        weights=np.array([0.8, -0.6, 0.5]),
        centers=np.array([0.25, 0.55, 0.8]),
        scales=np.array([60.0, 80.0, 60.0]),
    )
    x = np.sort(rng.uniform(0.0, 1.0, size=n))
    y = forward(net, x)
    if noise_sd > 0:
        y = y + noise_sd * rng.standard_normal(n)
    return Dataset(x, y, name="three-unit"), net
