"""Recovering an input-dependent lengthscale from noisy observations.

Ground truth comes from the model's own prior under a known single-bump
intensity; the latent-intensity sampler infers where the function wiggles.
"""
import numpy as np
from scipy.stats import pearsonr

from porbnet.gp import GPHyper
from porbnet.network import Hyperparams, NetworkState
from porbnet.sampler import MCMCConfig, run_mcmc
from porbnet.synthetic import bump_intensity, varying_lengthscale_task

region = (0.0, 1.0)
truth = bump_intensity(region, base=1.0, peak=8.0, center=0.5, width=0.1)
hyper = Hyperparams(s0_sq=1.0, noise_var=0.0036, region=region)
data, net = varying_lengthscale_task(hyper, truth, n=180, noise_sd=0.05, seed=2, x_range=(0.02, 0.98))
print(f"true generating network: {net.width} units at {np.round(np.sort(net.centers), 2)}")
print(f"true intensity: base {truth.value(0.05):.1f}, peak {truth.value(0.5):.1f} at x = 0.5")

cfg = MCMCConfig(
    n_iterations=1300, n_burnin=400, hmc_leapfrog_steps=15, hmc_step_size=0.01,
    birth_death_moves_per_iter=10, seed=0, h_snapshots=6,
    thinned_birth_death_per_sweep=20, intensity_grid_size=50,
)
empty = NetworkState(bias=0.0, weights=np.zeros(0), centers=np.zeros(0), scales=np.zeros(0))
chain = run_mcmc(
    data, hyper, cfg, "sgcp", lambda_star=10.0, gp_hyper=GPHyper(1.0, 0.3), init_state=empty,
)

lam_hat = np.stack([g.values for g in chain.intensity_grids]).mean(axis=0)
pos = chain.intensity_grids[0].positions
grid = np.linspace(0, 1, 100)
lh = np.interp(grid, pos, lam_hat)
lt = truth.value(grid)
print("\n   x    truth  inferred")
for x in (0.1, 0.3, 0.5, 0.7, 0.9):
    print(f"  {x:3.1f}  {np.interp(x, grid, lt):6.2f}  {np.interp(x, grid, lh):8.2f}")
print(f"\nPearson correlation with the truth on a 100-point grid: "
      f"{pearsonr(lh, lt).statistic:.3f}")
print("-> the inferred profile peaks where the true intensity does; its")
print("   overall level sits higher because the latent prior is centered at")
print("   half the bound.")
