"""Fixed-width BNN baseline with i.i.d. Gaussian priors in feedforward form.

Hidden unit k computes exp(-(v_k x + beta_k)^2 / 2): the same radial bump as
the main model but parameterized by input weight and input bias rather than
center and scale. Under zero-mean Gaussian priors on (v_k, beta_k) the
implied center -beta_k / v_k is Cauchy distributed, which concentrates units
near the origin and makes the function-space prior amplitude nonstationary.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .datasets import Dataset
from .network import NetworkState
from .sampler import Chain, DualAveraging, MCMCConfig, SamplerAbort, hmc_kernel


@dataclass(frozen=True)
class BNNHyper:
    """Width and i.i.d. prior variances: weights ~ N(0, sigma_w_sq), biases ~ N(0, sigma_b_sq)."""

    width: int = 10
    sigma_w_sq: float = 1.0
    sigma_b_sq: float = 1.0
    noise_var: float = 0.01

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be >= 1")
        for name in ("sigma_w_sq", "sigma_b_sq", "noise_var"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def _split(q: np.ndarray, k: int):
    return q[0], q[1 : 1 + k], q[1 + k : 1 + 2 * k], q[1 + 2 * k :]


def bnn_forward(q: np.ndarray, x, k: int):
    """Output b + sum_k w_k exp(-(v_k x + beta_k)^2 / 2) for parameter vector q."""
    b, w, v, beta = _split(np.asarray(q, dtype=float), k)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = v[None, :] * x[:, None] + beta[None, :]
    return b + np.exp(-0.5 * z * z) @ w


def log_posterior_and_grad(q: np.ndarray, x, y, hyper: BNNHyper):
    """Log posterior (up to a constant) and its gradient over [b, w, v, beta]."""
    k = hyper.width
    b, w, v, beta = _split(np.asarray(q, dtype=float), k)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    z = v[None, :] * x[:, None] + beta[None, :]
    phi = np.exp(-0.5 * z * z)
    f = b + phi @ w
    r = (y - f) / hyper.noise_var if x.size else np.zeros(0)
    logp = -0.5 * float(np.sum((y - f) ** 2)) / hyper.noise_var if x.size else 0.0
    logp += -0.5 * (b * b + np.sum(beta * beta)) / hyper.sigma_b_sq
    logp += -0.5 * (np.sum(w * w) + np.sum(v * v)) / hyper.sigma_w_sq
    db = float(np.sum(r)) - b / hyper.sigma_b_sq
    dw = (phi.T @ r if x.size else 0.0) - w / hyper.sigma_w_sq
    dphi = -phi * z * w[None, :]  # d f / d z_k per point
    dv = ((dphi * x[:, None]).T @ r if x.size else 0.0) - v / hyper.sigma_w_sq
    dbeta = (dphi.T @ r if x.size else 0.0) - beta / hyper.sigma_b_sq
    return logp, np.concatenate([[db], dw, dv, dbeta])


def to_center_scale(q: np.ndarray, k: int) -> NetworkState:
    """Rewrite a feedforward sample in center/scale form: c = -beta/v, s2 = v^2."""
    b, w, v, beta = _split(np.asarray(q, dtype=float), k)
    v_safe = np.where(np.abs(v) < 1e-12, 1e-12, v)
    return NetworkState(bias=float(b), weights=w, centers=-beta / v_safe, scales=v_safe**2)


def sample_prior_params(hyper: BNNHyper, rng: np.random.Generator) -> np.ndarray:
    k = hyper.width
    return np.concatenate(
        [
            rng.normal(0.0, np.sqrt(hyper.sigma_b_sq), size=1),
            rng.normal(0.0, np.sqrt(hyper.sigma_w_sq), size=k),
            rng.normal(0.0, np.sqrt(hyper.sigma_w_sq), size=k),
            rng.normal(0.0, np.sqrt(hyper.sigma_b_sq), size=k),
        ]
    )


def sample_prior_functions(hyper: BNNHyper, x_grid, n_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Matrix of prior function draws on a grid, shape (n_samples, len(grid))."""
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    k = hyper.width
    b = rng.normal(0.0, np.sqrt(hyper.sigma_b_sq), size=n_samples)
    w = rng.normal(0.0, np.sqrt(hyper.sigma_w_sq), size=(n_samples, k))
    v = rng.normal(0.0, np.sqrt(hyper.sigma_w_sq), size=(n_samples, k))
    beta = rng.normal(0.0, np.sqrt(hyper.sigma_b_sq), size=(n_samples, k))
    z = v[:, :, None] * x[None, None, :] + beta[:, :, None]
    return b[:, None] + np.einsum("sk,skx->sx", w, np.exp(-0.5 * z * z))


def run_bnn_baseline(data: Dataset, hyper: BNNHyper, config: MCMCConfig) -> Chain:
    """HMC over the fixed-dimension parameter vector; same chain interface.

    Retained samples are converted to center/scale form so the predictive and
    metric code paths are shared with the main model.
    """
    rng = np.random.default_rng(config.seed)
    x, y = data.x_train, data.y_train
    q = sample_prior_params(hyper, rng)
    eps = config.hmc_step_size
    adapt = DualAveraging(max(eps, 1e-6), config.adapt_target) if (config.adapt_step_size and eps > 0) else None

    def log_t(qv):
        return log_posterior_and_grad(qv, x, y, hyper)[0]

    def grad_u(qv):
        return -log_posterior_and_grad(qv, x, y, hyper)[1]

    samples: list[NetworkState] = []
    log_post: list[float] = []
    n_acc = 0
    n_divergent_post = 0
    n_post = 0
    for it in range(config.n_iterations):
        in_burnin = it < config.n_burnin
        q, accepted, acc_prob, divergent = hmc_kernel(
            q, log_t, grad_u, eps * rng.uniform(0.8, 1.2), config.hmc_leapfrog_steps, rng
        )
        n_acc += int(accepted)
        if adapt is not None and in_burnin:
            eps = adapt.update(acc_prob)
        if adapt is not None and it == config.n_burnin - 1:
            eps = adapt.adapted
        if not in_burnin:
            n_post += 1
            n_divergent_post += int(divergent)
            if n_post >= 20 and n_divergent_post / n_post > 0.5:
                raise SamplerAbort(
                    f"{n_divergent_post}/{n_post} post-burn-in trajectories diverged "
                    f"(step size {eps:.3g})"
                )
        log_post.append(log_t(q))
        if not in_burnin and (it - config.n_burnin) % config.thinning == 0 and len(samples) < config.n_samples:
            samples.append(to_center_scale(q, hyper.width))
    return Chain(
        samples=samples,
        log_posterior_trace=np.asarray(log_post),
        accept_rates={"hmc": n_acc / config.n_iterations},
        noise_var=hyper.noise_var,
        intensity_kind="bnn",
        divergence_fraction=(n_divergent_post / n_post if n_post else 0.0),
        step_size=eps,
    )
