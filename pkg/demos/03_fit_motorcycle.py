"""Posterior inference on the motorcycle impact data with a learned intensity.

Runs the full three-step sampler (HMC over parameters, width birth/death,
latent-intensity sweeps) on a normalized 75/25 split and reports held-out
metrics plus the inferred pointwise intensity profile.
"""
from pathlib import Path

import numpy as np

from porbnet.datasets import load_csv, normalize, split
from porbnet.gp import GPHyper
from porbnet.metrics import rmse, test_log_likelihood
from porbnet.network import Hyperparams, NetworkState
from porbnet.sampler import MCMCConfig, posterior_predictive, run_mcmc

data_path = Path(__file__).resolve().parent.parent / "data" / "motorcycle.csv"
data = normalize(split(load_csv(data_path), 0.75, seed=0))
print(f"motorcycle: {data.x_train.size} train / {data.x_test.size} test points (normalized)")

hyper = Hyperparams(s0_sq=4.0, noise_var=0.04, region=(-0.15, 1.15))
cfg = MCMCConfig(
    n_iterations=1200, n_burnin=400, hmc_leapfrog_steps=20, hmc_step_size=0.01,
    birth_death_moves_per_iter=10, seed=0, h_snapshots=5, intensity_grid_size=60,
)
empty = NetworkState(bias=0.0, weights=np.zeros(0), centers=np.zeros(0), scales=np.zeros(0))
chain = run_mcmc(
    data, hyper, cfg, "sgcp", lambda_star=25.0, gp_hyper=GPHyper(1.5, 0.25), init_state=empty,
)

ks = np.array([s.width for s in chain.samples])
print(f"posterior width: mean {ks.mean():.1f}, 90% interval [{np.quantile(ks, 0.05):.0f}, {np.quantile(ks, 0.95):.0f}]")
print(f"acceptance rates: { {k: round(v, 2) for k, v in chain.accept_rates.items()} }")
print(f"test log likelihood: {test_log_likelihood(chain, data.x_test, data.y_test):.3f}")
print(f"test RMSE:           {rmse(chain, data.x_test, data.y_test):.3f}")

pred = posterior_predictive(chain, np.linspace(0, 1, 9), np.random.default_rng(0))
print("\npredictive bands (x, mean, sd):")
for x, m, s in zip(pred["x"], pred["mean"], pred["sd"]):
    print(f"  {x:4.2f}  {m:+.3f}  {s:.3f}")

lam = np.stack([g.values for g in chain.intensity_grids]).mean(axis=0)
pos = chain.intensity_grids[0].positions
mid = lam[(pos > 0.25) & (pos < 0.6)].mean()
edge = lam[(pos < 0.1) | (pos > 0.9)].mean()
print(f"\ninferred intensity: mid-region mean {mid:.1f} vs edge mean {edge:.1f}")
print("-> the intensity rises where the acceleration trace wiggles fastest.")
