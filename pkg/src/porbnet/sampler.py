"""Transdimensional MCMC for the network posterior.

Each iteration runs three steps: (1) a Hamiltonian update of all network
parameters (bias, weights, centers) with scales recomputed from the intensity
after every position change, (2) birth/death Metropolis-Hastings moves on the
network width, and (3) an intensity update whose form depends on the mode
(fixed, random-walk on a learned homogeneous level, or sigmoidal-GP Cox
process sweeps feeding a plug-in pointwise estimate).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import sgcp as sgcp_mod
from .datasets import Dataset
from .gp import GPHyper
from .intensity import (
    GridIntensity,
    HomogeneousIntensity,
    PiecewiseLinearFn,
    log_prior,
    sample_prior_network,
    scales_from_intensity,
    sigmoid,
)
from .network import Hyperparams, NetworkState, grad_log_posterior, log_full_conditional, log_likelihood


class SamplerAbort(RuntimeError):
    """Raised when the sampler diverges too often to be trustworthy."""


@dataclass(frozen=True)
class MCMCConfig:
    """Tuning knobs for the three-step sampler."""

    n_iterations: int = 2000
    n_burnin: int = 500
    thinning: int = 1
    hmc_leapfrog_steps: int = 20
    hmc_step_size: float = 0.05
    birth_death_moves_per_iter: int = 10
    proposal_scale_s_sq: float = 0.01  # reserved for a free-scale proposal mode
    seed: int = 0
    adapt_step_size: bool = True
    adapt_target: float = 0.75
    # intensity-update knobs
    lambda_rw_step: float = 0.1
    h_step_size: float = 0.15
    h_leapfrog: int = 10
    h_snapshots: int = 10
    thinned_birth_death_per_sweep: int = 10
    intensity_grid_size: int = 100

    def __post_init__(self):
        if not 0 <= self.n_burnin < self.n_iterations:
            raise ValueError("need 0 <= n_burnin < n_iterations")
        if self.thinning < 1 or self.hmc_leapfrog_steps < 1:
            raise ValueError("thinning and leapfrog steps must be >= 1")
        if self.hmc_step_size < 0:
            raise ValueError("step size must be nonnegative")

    @property
    def n_samples(self) -> int:
        return (self.n_iterations - self.n_burnin) // self.thinning


@dataclass
class Chain:
    """Ordered posterior samples plus acceptance and trace bookkeeping."""

    samples: list[NetworkState]
    log_posterior_trace: np.ndarray
    accept_rates: dict[str, float]
    noise_var: float
    intensity_kind: str
    lambda_trace: np.ndarray | None = None
    intensity_ids: list[int] | None = None
    intensity_grids: list[PiecewiseLinearFn] = field(default_factory=list)
    divergence_fraction: float = 0.0
    step_size: float = float("nan")

    def __len__(self) -> int:
        return len(self.samples)


# ---------------------------------------------------------------------------
# generic HMC machinery


def leapfrog(q, p, grad_neg_log_target, eps: float, n_steps: int):
    """Standard leapfrog integration of Hamilton's equations.

    grad_neg_log_target returns the gradient of U = -log target. Volume
    preserving and exactly time reversible (up to float roundoff).
    """
    q = np.array(q, dtype=float)
    p = np.array(p, dtype=float)
    # overflow here is an expected, handled condition: the caller detects
    # non-finite states and rejects the trajectory as divergent
    with np.errstate(over="ignore", invalid="ignore"):
        p = p - 0.5 * eps * grad_neg_log_target(q)
        for i in range(n_steps):
            q = q + eps * p
            if i < n_steps - 1:
                p = p - eps * grad_neg_log_target(q)
        p = p - 0.5 * eps * grad_neg_log_target(q)
    return q, p


def hmc_kernel(q0, log_target, grad_neg_log_target, eps, n_steps, rng):
    """One HMC transition. Returns (q1, accepted, accept_prob, divergent).

    A -inf endpoint log target (support violation, e.g. a center pushed
    outside the region) is an ordinary rejection; numerical blowups (NaN or
    non-finite positions/momenta) count as divergences.
    """
    q0 = np.asarray(q0, dtype=float)
    p0 = rng.standard_normal(q0.size)
    logp0 = log_target(q0)
    h0 = -logp0 + 0.5 * float(p0 @ p0)
    q1, p1 = leapfrog(q0, p0, grad_neg_log_target, eps, n_steps)
    if not (np.all(np.isfinite(q1)) and np.all(np.isfinite(p1))):
        return q0, False, 0.0, True
    logp1 = log_target(q1)
    if np.isnan(logp1):
        return q0, False, 0.0, True
    if np.isneginf(logp1):
        return q0, False, 0.0, False
    h1 = -logp1 + 0.5 * float(p1 @ p1)
    log_acc = h0 - h1
    assert not np.isnan(log_acc)
    accept_prob = min(1.0, float(np.exp(min(log_acc, 0.0))))
    if np.log(rng.uniform()) < log_acc:
        return q1, True, accept_prob, False
    return q0, False, accept_prob, False


class DualAveraging:
    """Step-size adaptation toward a target acceptance rate (burn-in only)."""

    def __init__(self, eps0: float, target: float = 0.75, gamma: float = 0.05, t0: float = 10.0, kappa: float = 0.75):
        self.mu = np.log(10.0 * eps0)
        self.target = target
        self.gamma = gamma
        self.t0 = t0
        self.kappa = kappa
        self.t = 0
        self.h_bar = 0.0
        self.log_eps = np.log(eps0)
        self.log_eps_bar = np.log(eps0)

    def update(self, accept_prob: float) -> float:
        self.t += 1
        eta = 1.0 / (self.t + self.t0)
        self.h_bar = (1 - eta) * self.h_bar + eta * (self.target - accept_prob)
        self.log_eps = self.mu - np.sqrt(self.t) / self.gamma * self.h_bar
        w = self.t ** (-self.kappa)
        self.log_eps_bar = w * self.log_eps + (1 - w) * self.log_eps_bar
        return float(np.exp(self.log_eps))

    @property
    def adapted(self) -> float:
        return float(np.exp(self.log_eps_bar))


# ---------------------------------------------------------------------------
# network parameter update (step 1)


def _pack(state: NetworkState) -> np.ndarray:
    return np.concatenate([[state.bias], state.weights, state.centers])


def _unpack(q: np.ndarray, hyper: Hyperparams, intensity) -> NetworkState:
    k = (q.size - 1) // 2
    centers = q[1 + k :]
    return NetworkState(
        bias=float(q[0]),
        weights=q[1 : 1 + k],
        centers=centers,
        scales=scales_from_intensity(centers, hyper, intensity),
    )


def hmc_update(
    state: NetworkState,
    x,
    y,
    hyper: Hyperparams,
    intensity,
    n_steps: int,
    eps: float,
    rng: np.random.Generator,
):
    """HMC move over (bias, weights, centers); scales follow the centers.

    Returns (state, accepted, accept_prob, divergent). A non-finite
    Hamiltonian rejects and is flagged as divergent; a center that ends up
    outside the region is rejected through the -inf log target.
    """

    def log_t(q):
        return log_full_conditional(_unpack(q, hyper, intensity), x, y, hyper, intensity)

    def grad_u(q):
        st = _unpack(q, hyper, intensity)
        db, dw, dc = grad_log_posterior(st, x, y, hyper, intensity)
        return -np.concatenate([[db], dw, dc])

    q1, accepted, accept_prob, divergent = hmc_kernel(_pack(state), log_t, grad_u, eps, n_steps, rng)
    new_state = _unpack(q1, hyper, intensity) if accepted else state
    return new_state, accepted, accept_prob, divergent


# ---------------------------------------------------------------------------
# birth/death moves on the width (step 2)


def birth_death_update(
    state: NetworkState,
    x,
    y,
    hyper: Hyperparams,
    intensity,
    rng: np.random.Generator,
    sgcp_state: sgcp_mod.SGCPState | None = None,
):
    """One birth-or-death Metropolis-Hastings move on the network width.

    Birth: location uniform on the region, weight from its prior, scale tied
    to the intensity at the location; accepted with
    likelihood ratio * lambda(c') * |region| / (K+1). Death reverses it with
    likelihood ratio * K / (lambda(c') * |region|). Under the sigmoidal-GP
    intensity, lambda(c') = lambda* sigmoid(h(c')) with h drawn from (birth)
    or stored at (death) the unit's location.

    Returns (state, move, accepted, sgcp_state).
    """
    c0, c1 = intensity.region
    volume = c1 - c0
    ll_cur = log_likelihood(state, x, y, hyper.noise_var)
    if rng.uniform() < 0.5:
        move = "birth"
        loc = rng.uniform(c0, c1)
        w_new = rng.normal(0.0, np.sqrt(hyper.weight_prior_var))
        if sgcp_state is not None:
            sgcp_prop, h_new = sgcp_mod.birth_center(sgcp_state, loc, rng)
            log_lam = np.log(sgcp_state.lambda_star) + float(np.log(sigmoid(h_new)))
        else:
            sgcp_prop = None
            log_lam = float(intensity.log_value(loc))
        prop = NetworkState(
            bias=state.bias,
            weights=np.append(state.weights, w_new),
            centers=np.append(state.centers, loc),
            scales=np.append(state.scales, scales_from_intensity(np.array([loc]), hyper, intensity)),
        )
        ll_prop = log_likelihood(prop, x, y, hyper.noise_var)
        log_acc = ll_prop - ll_cur + log_lam + np.log(volume) - np.log(state.width + 1)
        assert not np.isnan(log_acc)
        if np.log(rng.uniform()) < log_acc:
            return prop, move, True, (sgcp_prop if sgcp_prop is not None else sgcp_state)
        return state, move, False, sgcp_state
    move = "death"
    if state.width == 0:
        return state, move, False, sgcp_state
    j = int(rng.integers(state.width))
    if sgcp_state is not None:
        log_lam = np.log(sgcp_state.lambda_star) + float(np.log(sigmoid(sgcp_state.h_centers[j])))
    else:
        log_lam = float(intensity.log_value(state.centers[j]))
    prop = NetworkState(
        bias=state.bias,
        weights=np.delete(state.weights, j),
        centers=np.delete(state.centers, j),
        scales=np.delete(state.scales, j),
    )
    ll_prop = log_likelihood(prop, x, y, hyper.noise_var)
    log_acc = ll_prop - ll_cur + np.log(state.width) - log_lam - np.log(volume)
    assert not np.isnan(log_acc)
    if np.log(rng.uniform()) < log_acc:
        sgcp_new = sgcp_mod.death_center(sgcp_state, j) if sgcp_state is not None else sgcp_state
        return prop, move, True, sgcp_new
    return state, move, False, sgcp_state


def birth_log_acceptance(state_width: int, log_lam: float, volume: float, log_lik_ratio: float) -> float:
    """Log birth acceptance ratio; exposed for detailed-balance checks."""
    return log_lik_ratio + log_lam + np.log(volume) - np.log(state_width + 1)


def death_log_acceptance(state_width: int, log_lam: float, volume: float, log_lik_ratio: float) -> float:
    """Log death acceptance ratio for a width-K state (K >= 1)."""
    return log_lik_ratio + np.log(state_width) - log_lam - np.log(volume)


# ---------------------------------------------------------------------------
# homogeneous level update (step 3, learned-level mode)


def _level_log_target(lam, state, x, y, hyper, region) -> float:
    """Density of the level: Gamma prior on lambda^2, point process terms, and
    the likelihood with scales tied to the level."""
    if lam <= 0:
        return float("-inf")
    lam_sq = lam * lam
    out = (hyper.gamma_alpha - 1.0) * np.log(lam_sq) - hyper.gamma_beta * lam_sq + np.log(2.0 * lam)
    out += -lam * (region[1] - region[0]) + state.width * np.log(lam)
    scaled = replace(state, scales=np.full(state.width, hyper.s0_sq * lam_sq))
    out += log_likelihood(scaled, x, y, hyper.noise_var)
    return float(out)


def update_homogeneous_level(
    state: NetworkState,
    x,
    y,
    hyper: Hyperparams,
    intensity: HomogeneousIntensity,
    rng: np.random.Generator,
    rw_step: float = 0.1,
):
    """Random-walk MH on log(level); scales move with the level on acceptance."""
    lam = intensity.level
    lam_prop = float(lam * np.exp(rw_step * rng.standard_normal()))
    log_acc = (
        _level_log_target(lam_prop, state, x, y, hyper, intensity.region)
        - _level_log_target(lam, state, x, y, hyper, intensity.region)
        + np.log(lam_prop)
        - np.log(lam)
    )
    assert not np.isnan(log_acc)
    if np.log(rng.uniform()) < log_acc:
        new_int = intensity.with_level(lam_prop)
        new_state = replace(state, scales=scales_from_intensity(state.centers, hyper, new_int))
        return new_state, new_int, True
    return state, intensity, False


# ---------------------------------------------------------------------------
# full sampler (steps 1-3)


def run_mcmc(
    data: Dataset,
    hyper: Hyperparams,
    config: MCMCConfig,
    intensity_mode: str = "fixed",
    intensity=None,
    lambda_star: float | None = None,
    gp_hyper: GPHyper | None = None,
    init_state: NetworkState | None = None,
) -> Chain:
    """Run the three-step sampler and return the thinned post-burn-in chain.

    intensity_mode: "fixed" (intensity given and held), "homogeneous-learned"
    (random-walk MH on the level with its Gamma prior), or "sgcp" (thinned
    events + latent h sweeps with a plug-in pointwise intensity estimate).
    Aborts if more than half of the post-burn-in trajectories diverge.
    """
    if intensity_mode not in ("fixed", "homogeneous-learned", "sgcp"):
        raise ValueError(f"unknown intensity_mode {intensity_mode!r}")
    rng = np.random.default_rng(config.seed)
    x, y = data.x_train, data.y_train
    region = hyper.region
    volume = region[1] - region[0]

    sgcp_state = None
    lam_hat_grid = np.linspace(region[0], region[1], config.intensity_grid_size)
    if intensity_mode == "sgcp":
        if lambda_star is None:
            raise ValueError("sgcp mode needs lambda_star")
        if gp_hyper is None:
            gp_hyper = GPHyper(kernel_variance=1.0, kernel_lengthscale=0.2 * volume)
    elif intensity_mode == "homogeneous-learned":
        if intensity is None:
            intensity = HomogeneousIntensity(float(np.sqrt(hyper.gamma_alpha / hyper.gamma_beta)), region)
    elif intensity is None:
        raise ValueError("fixed mode needs an intensity")
    if intensity is not None and tuple(intensity.region) != tuple(region):
        raise ValueError("intensity region and hyper.region disagree")

    if intensity_mode == "sgcp":
        # start from the prior-mean plug-in (h = 0 -> lambda*/2 everywhere)
        intensity = GridIntensity(
            PiecewiseLinearFn(lam_hat_grid, np.full(lam_hat_grid.size, 0.5 * lambda_star)), region
        )

    state = init_state if init_state is not None else sample_prior_network(hyper, intensity, rng)
    state.validate(region)
    if intensity_mode == "sgcp":
        sgcp_state = sgcp_mod.initial_sgcp_state(lambda_star, region, gp_hyper, state.centers, rng)

    eps = config.hmc_step_size
    adapt = DualAveraging(max(eps, 1e-6), config.adapt_target) if (config.adapt_step_size and eps > 0) else None

    samples: list[NetworkState] = []
    lambda_trace: list[float] = []
    intensity_ids: list[int] = []
    intensity_grids: list[PiecewiseLinearFn] = []
    log_post: list[float] = []
    counts = {"hmc": [0, 0], "birth": [0, 0], "death": [0, 0], "level": [0, 0]}
    n_divergent_post = 0
    n_post = 0

    for it in range(config.n_iterations):
        in_burnin = it < config.n_burnin

        # step 1: all network parameters at once (+-20% step jitter avoids
        # leapfrog resonances on near-Gaussian targets)
        state, acc, acc_prob, divergent = hmc_update(
            state, x, y, hyper, intensity, config.hmc_leapfrog_steps, eps * rng.uniform(0.8, 1.2), rng
        )
        counts["hmc"][0] += int(acc)
        counts["hmc"][1] += 1
        if adapt is not None and in_burnin:
            eps = adapt.update(acc_prob)
        if adapt is not None and it == config.n_burnin - 1:
            eps = adapt.adapted
        if not in_burnin:
            n_post += 1
            n_divergent_post += int(divergent)
            if n_post >= 20 and n_divergent_post / n_post > 0.5:
                raise SamplerAbort(
                    f"{n_divergent_post}/{n_post} post-burn-in trajectories diverged; "
                    f"step size {eps:.3g} with {config.hmc_leapfrog_steps} leapfrog steps "
                    "needs retuning"
                )
        if sgcp_state is not None and acc:
            sgcp_state = sgcp_mod.sync_centers(sgcp_state, state.centers, rng)

        # step 2: width moves
        for _ in range(config.birth_death_moves_per_iter):
            state, move, accepted, sgcp_state = birth_death_update(
                state, x, y, hyper, intensity, rng, sgcp_state
            )
            counts[move][0] += int(accepted)
            counts[move][1] += 1

        # step 3: intensity update
        if intensity_mode == "homogeneous-learned":
            state, intensity, acc_level = update_homogeneous_level(
                state, x, y, hyper, intensity, rng, config.lambda_rw_step
            )
            counts["level"][0] += int(acc_level)
            counts["level"][1] += 1
        elif intensity_mode == "sgcp":
            snaps = []
            for _ in range(config.h_snapshots):
                sgcp_state = sgcp_mod.update_thinned_events(
                    sgcp_state, state.centers, rng, config.thinned_birth_death_per_sweep
                )
                sgcp_state = sgcp_mod.update_h(
                    sgcp_state, state.centers, False, rng, config.h_step_size, config.h_leapfrog
                )
                snaps.append(sgcp_mod.snapshot(sgcp_state))
            lam_hat = sgcp_mod.intensity_point_estimate(snaps, lambda_star, lam_hat_grid, gp_hyper)
            intensity = GridIntensity(lam_hat, region)
            state = replace(state, scales=scales_from_intensity(state.centers, hyper, intensity))
            assert sgcp_state.h_support.size == sgcp_state.n_thinned + state.width

        lp = log_likelihood(state, x, y, hyper.noise_var) + log_prior(state, hyper, intensity)
        log_post.append(lp)

        if not in_burnin and (it - config.n_burnin) % config.thinning == 0 and len(samples) < config.n_samples:
            state.validate(region)
            samples.append(state)
            if intensity_mode == "sgcp":
                intensity_grids.append(intensity.fn)
                intensity_ids.append(len(intensity_grids) - 1)
                lambda_trace.append(float(np.mean(intensity.fn.values)))
            else:
                lambda_trace.append(float(intensity.level) if isinstance(intensity, HomogeneousIntensity) else float("nan"))

    rates = {k: (v[0] / v[1] if v[1] else 0.0) for k, v in counts.items() if v[1]}
    return Chain(
        samples=samples,
        log_posterior_trace=np.asarray(log_post),
        accept_rates=rates,
        noise_var=hyper.noise_var,
        intensity_kind=intensity_mode,
        lambda_trace=np.asarray(lambda_trace),
        intensity_ids=intensity_ids or None,
        intensity_grids=intensity_grids,
        divergence_fraction=(n_divergent_post / n_post if n_post else 0.0),
        step_size=eps,
    )


# ---------------------------------------------------------------------------
# posterior predictive


def predictive_matrix(samples, x_grid) -> np.ndarray:
    """Network outputs for every retained sample, shape (S, len(x_grid))."""
    from .network import forward

    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    return np.stack([forward(s, x_grid) for s in samples])


def posterior_predictive(chain: Chain, x_grid, rng: np.random.Generator | None = None) -> dict:
    """Predictive mean/sd and 5%/95% quantiles on a grid.

    The variance adds the observation noise to the sample variance of the
    network outputs; quantiles come from one noisy draw per chain sample.
    """
    if len(chain) == 0:
        raise ValueError("chain has no samples")
    if rng is None:
        rng = np.random.default_rng(0)
    x_grid = np.atleast_1d(np.asarray(x_grid, dtype=float))
    f = predictive_matrix(chain.samples, x_grid)
    mean = f.mean(axis=0)
    var = (f.var(axis=0, ddof=1) if f.shape[0] > 1 else np.zeros(x_grid.size)) + chain.noise_var
    draws = f + np.sqrt(chain.noise_var) * rng.standard_normal(f.shape)
    q05 = np.quantile(draws, 0.05, axis=0)
    q95 = np.quantile(draws, 0.95, axis=0)
    return {"x": x_grid, "mean": mean, "sd": np.sqrt(var), "q05": q05, "q95": q95}
