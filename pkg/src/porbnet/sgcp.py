"""Sigmoidal-GP Cox process intensity inference.

The latent function h lives at finitely many support points: M auxiliary
"thinned" locations plus the K current network centers. Thinned events make
the Cox-process likelihood tractable: centers contribute sigmoid(h) factors,
thinned events contribute (1 - sigmoid(h)). One inference sweep is a
birth/death + perturbation pass over the thinned events followed by a whitened
HMC update of h; averaging lambda* sigmoid(h) over sweeps gives the pointwise
plug-in estimate of the intensity.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import gp
from .intensity import PiecewiseLinearFn, sigmoid


def _log_sigmoid(z):
    z = np.asarray(z, dtype=float)
    return np.where(z >= 0, -np.log1p(np.exp(-np.abs(z))), z - np.log1p(np.exp(-np.abs(z))))


def _log1m_sigmoid(z):
    return _log_sigmoid(-np.asarray(z, dtype=float))


@dataclass(frozen=True)
class SGCPState:
    """Latent intensity state: bound, thinned events, and h at all support points.

    center_locations mirrors the network's centers so the state is
    self-contained for GP conditionals; h_centers holds h there. The support
    invariant len(h_thinned) + len(h_centers) == M + K holds by construction.
    """

    lambda_star: float
    region: tuple[float, float]
    thinned: np.ndarray
    h_thinned: np.ndarray
    center_locations: np.ndarray
    h_centers: np.ndarray
    gp_hyper: gp.GPHyper

    def __post_init__(self):
        for name in ("thinned", "h_thinned", "center_locations", "h_centers"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if self.lambda_star <= 0:
            raise ValueError("lambda_star must be positive")
        if self.thinned.size != self.h_thinned.size:
            raise ValueError("thinned locations and h values must match in length")
        if self.center_locations.size != self.h_centers.size:
            raise ValueError("center locations and h values must match in length")
        if self.thinned.size and (
            self.thinned.min() < self.region[0] or self.thinned.max() > self.region[1]
        ):
            raise ValueError("thinned locations must lie inside the region")

    @property
    def n_thinned(self) -> int:
        return self.thinned.size

    @property
    def support(self) -> np.ndarray:
        return np.concatenate([self.thinned, self.center_locations])

    @property
    def h_support(self) -> np.ndarray:
        return np.concatenate([self.h_thinned, self.h_centers])


@dataclass(frozen=True)
class HSnapshot:
    """One retained draw of h: its support locations and values there."""

    locations: np.ndarray
    values: np.ndarray


def initial_sgcp_state(
    lambda_star: float,
    region: tuple[float, float],
    gp_hyper: gp.GPHyper,
    centers: np.ndarray,
    rng: np.random.Generator,
) -> SGCPState:
    """Start from a joint prior draw of (thinned events, h) given the centers."""
    c0, c1 = region
    centers = np.asarray(centers, dtype=float)
    m = rng.poisson(0.5 * lambda_star * (c1 - c0))
    thinned = np.sort(rng.uniform(c0, c1, size=m))
    support = np.concatenate([thinned, centers])
    h = gp.sample_prior(support, gp_hyper, rng)
    return SGCPState(lambda_star, (c0, c1), thinned, h[:m], centers, h[m:], gp_hyper)


def _conditional_draw(
    support_x: np.ndarray,
    support_h: np.ndarray,
    query_x: np.ndarray,
    hyper: gp.GPHyper,
    rng: np.random.Generator,
) -> np.ndarray:
    """Joint draw of h at query_x from the GP conditional on the support."""
    query_x = np.atleast_1d(np.asarray(query_x, dtype=float))
    if query_x.size == 0:
        return np.zeros(0)
    if len(support_x) == 0:
        return gp.sample_prior(query_x, hyper, rng)
    chol = gp.chol_with_jitter(gp.se_kernel(support_x, support_x, hyper), hyper.kernel_variance)
    k_sq = gp.se_kernel(support_x, query_x, hyper)
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, np.asarray(support_h, dtype=float)))
    mean = k_sq.T @ alpha
    v = np.linalg.solve(chol, k_sq)
    cov = gp.se_kernel(query_x, query_x, hyper) - v.T @ v
    chol_c = gp.chol_with_jitter(cov, hyper.kernel_variance)
    return mean + chol_c @ rng.standard_normal(query_x.size)


def sync_centers(state: SGCPState, centers: np.ndarray, rng: np.random.Generator) -> SGCPState:
    """Match the state's center support to the given locations.

    Locations already present keep their h values; anything new or moved is
    redrawn from the GP conditional on the full current support, which keeps
    the latent function continuous under small center moves.
    """
    centers = np.asarray(centers, dtype=float)
    if centers.size == state.center_locations.size and np.array_equal(centers, state.center_locations):
        return state
    h_new = _conditional_draw(state.support, state.h_support, centers, state.gp_hyper, rng)
    return replace(state, center_locations=centers, h_centers=h_new)


def birth_center(state: SGCPState, location: float, rng: np.random.Generator) -> tuple[SGCPState, float]:
    """Draw h at a proposed new center; return the extended state and h value."""
    h_new = float(_conditional_draw(state.support, state.h_support, [location], state.gp_hyper, rng)[0])
    st = replace(
        state,
        center_locations=np.append(state.center_locations, location),
        h_centers=np.append(state.h_centers, h_new),
    )
    return st, h_new


def death_center(state: SGCPState, index: int) -> SGCPState:
    return replace(
        state,
        center_locations=np.delete(state.center_locations, index),
        h_centers=np.delete(state.h_centers, index),
    )


def update_thinned_events(
    state: SGCPState,
    centers: np.ndarray,
    rng: np.random.Generator,
    n_birth_death: int = 10,
    pert_scale: float | None = None,
) -> SGCPState:
    """One sweep of birth/death moves on the thinned events plus perturbations.

    Births propose a uniform location with h from the GP conditional and are
    accepted with the (1 - sigmoid(h)) thinning factor; deaths reverse them.
    Location perturbations are Gaussian random walks, rejected outside the
    region, with h reconditioned at the proposed location.
    """
    state = sync_centers(state, centers, rng)
    c0, c1 = state.region
    volume = c1 - c0
    if pert_scale is None:
        pert_scale = 0.1 * volume
    for _ in range(n_birth_death):
        m = state.n_thinned
        if rng.uniform() < 0.5:
            loc = rng.uniform(c0, c1)
            h_new = float(_conditional_draw(state.support, state.h_support, [loc], state.gp_hyper, rng)[0])
            log_acc = np.log(state.lambda_star * volume) + float(_log1m_sigmoid(h_new)) - np.log(m + 1)
            assert not np.isnan(log_acc)
            if np.log(rng.uniform()) < log_acc:
                state = replace(
                    state,
                    thinned=np.append(state.thinned, loc),
                    h_thinned=np.append(state.h_thinned, h_new),
                )
        elif m > 0:
            j = int(rng.integers(m))
            log_acc = np.log(m) - np.log(state.lambda_star * volume) - float(_log1m_sigmoid(state.h_thinned[j]))
            assert not np.isnan(log_acc)
            if np.log(rng.uniform()) < log_acc:
                state = replace(
                    state,
                    thinned=np.delete(state.thinned, j),
                    h_thinned=np.delete(state.h_thinned, j),
                )
    # location perturbations, one MH pass over the thinned events
    for j in range(state.n_thinned):
        prop = state.thinned[j] + pert_scale * rng.standard_normal()
        if prop < c0 or prop > c1:
            continue
        keep = np.ones(state.n_thinned, dtype=bool)
        keep[j] = False
        support = np.concatenate([state.thinned[keep], state.center_locations])
        h_all = np.concatenate([state.h_thinned[keep], state.h_centers])
        h_new = float(_conditional_draw(support, h_all, [prop], state.gp_hyper, rng)[0])
        log_acc = float(_log1m_sigmoid(h_new)) - float(_log1m_sigmoid(state.h_thinned[j]))
        assert not np.isnan(log_acc)
        if np.log(rng.uniform()) < log_acc:
            thinned = state.thinned.copy()
            h_thinned = state.h_thinned.copy()
            thinned[j] = prop
            h_thinned[j] = h_new
            state = replace(state, thinned=thinned, h_thinned=h_thinned)
    return state


def h_target_and_grad(nu: np.ndarray, chol: np.ndarray, n_thinned: int, data_free: bool = False):
    """Whitened h-target: GP prior (standard normal in nu) plus sigmoid terms.

    h = chol @ nu; centers contribute log sigmoid(h), thinned events
    log(1 - sigmoid(h)). Returns (log target, gradient in nu).
    """
    h = chol @ nu
    logp = -0.5 * float(nu @ nu)
    grad_h = np.zeros_like(h)
    if not data_free and h.size:
        sig = sigmoid(h)
        thin = slice(0, n_thinned)
        cent = slice(n_thinned, h.size)
        logp += float(np.sum(_log1m_sigmoid(h[thin]))) + float(np.sum(_log_sigmoid(h[cent])))
        grad_h[thin] = -sig[thin]
        grad_h[cent] = 1.0 - sig[cent]
    return logp, -nu + chol.T @ grad_h


def update_h(
    state: SGCPState,
    centers: np.ndarray,
    data_free: bool,
    rng: np.random.Generator,
    step_size: float = 0.15,
    n_leapfrog: int = 10,
) -> SGCPState:
    """One whitened HMC update of h at all support points."""
    state = sync_centers(state, centers, rng)
    support = state.support
    n = support.size
    if n == 0:
        return state
    chol = gp.chol_with_jitter(
        gp.se_kernel(support, support, state.gp_hyper), state.gp_hyper.kernel_variance
    )
    # +-20% step jitter breaks leapfrog resonances on near-Gaussian targets
    step_size = step_size * rng.uniform(0.8, 1.2)
    nu = np.linalg.solve(chol, state.h_support)
    logp0, grad = h_target_and_grad(nu, chol, state.n_thinned, data_free)
    p = rng.standard_normal(n)
    h0 = -logp0 + 0.5 * float(p @ p)
    q = nu.copy()
    p = p + 0.5 * step_size * grad
    for i in range(n_leapfrog):
        q = q + step_size * p
        logp, grad = h_target_and_grad(q, chol, state.n_thinned, data_free)
        if i < n_leapfrog - 1:
            p = p + step_size * grad
    p = p + 0.5 * step_size * grad
    h1 = -logp + 0.5 * float(p @ p)
    log_acc = h0 - h1
    assert not np.isnan(log_acc)
    if np.isfinite(log_acc) and np.log(rng.uniform()) < log_acc:
        h_new = chol @ q
        state = replace(state, h_thinned=h_new[: state.n_thinned], h_centers=h_new[state.n_thinned :])
    return state


def snapshot(state: SGCPState) -> HSnapshot:
    return HSnapshot(locations=state.support, values=state.h_support)


def intensity_point_estimate(
    h_samples: list[HSnapshot],
    lambda_star: float,
    grid: np.ndarray,
    gp_hyper: gp.GPHyper,
) -> PiecewiseLinearFn:
    """Monte Carlo pointwise intensity estimate on a grid.

    Each snapshot is evaluated on the grid through its GP conditional mean;
    the estimate averages lambda* sigmoid(h) across snapshots, so values stay
    strictly inside (0, lambda*).
    """
    if not h_samples:
        raise ValueError("need at least one h snapshot")
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    acc = np.zeros(grid.size)
    for snap in h_samples:
        mean, _ = gp.conditional(snap.locations, snap.values, grid, gp_hyper)
        acc += lambda_star * np.asarray(sigmoid(mean))
    return PiecewiseLinearFn(grid, acc / len(h_samples))


def resample_centers_from_sgcp(state: SGCPState, rng: np.random.Generator):
    """Gibbs draw of (centers, h at centers) given the thinned events.

    Candidates form a Poisson process at the bound; h is drawn jointly from
    the GP conditional on the thinned support; candidates are kept with
    probability sigmoid(h). Used by prior-reproduction checks.
    """
    c0, c1 = state.region
    n_cand = rng.poisson(state.lambda_star * (c1 - c0))
    cand = np.sort(rng.uniform(c0, c1, size=n_cand))
    h_cand = _conditional_draw(state.thinned, state.h_thinned, cand, state.gp_hyper, rng)
    keep = rng.uniform(size=n_cand) < sigmoid(h_cand)
    centers = cand[keep]
    st = replace(state, center_locations=centers, h_centers=h_cand[keep])
    return centers, st
