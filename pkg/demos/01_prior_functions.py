"""Prior function draws: amplitude stays put while the level sets wiggliness.

Draws prior networks at three intensity levels and contrasts them with the
feedforward baseline, whose amplitude collapses away from the origin.
"""
import numpy as np

from porbnet.bnn import BNNHyper, sample_prior_functions as bnn_prior
from porbnet.intensity import HomogeneousIntensity
from porbnet.kernels import sample_prior_functions
from porbnet.metrics import mean_upcrossings
from porbnet.network import Hyperparams

hyper = Hyperparams(s0_sq=1.0, sigma_w_sq=1.0, sigma_b_sq=1.0, region=(-5.0, 5.0))
grid = np.linspace(-5, 5, 400)
rng = np.random.default_rng(0)

print("Poisson-process RBF network prior, region [-5, 5]:")
print(f"{'level':>6} {'var(0)':>8} {'var(3)':>8} {'mean upcrossings':>18}")
for lam in (1.0, 2.0, 4.0):
    intens = HomogeneousIntensity(lam, hyper.region)
    f = sample_prior_functions(hyper, intens, grid, 5000, rng)
    v = f.var(axis=0)
    ups = mean_upcrossings(f)
    print(f"{lam:6.1f} {v[200]:8.3f} {v[320]:8.3f} {ups:18.3f}")
print("-> pointwise variance is flat in x and does not move with the level;")
print("   the level only controls how often samples cross zero (lengthscale).")

print("\nStandard feedforward baseline (i.i.d. Gaussian priors, width 10):")
bnn = BNNHyper(width=10, sigma_w_sq=1.0, sigma_b_sq=1.0)
fb = bnn_prior(bnn, grid, 5000, rng)
vb = fb.var(axis=0)
print(f"  var(0) = {vb[200]:.3f}   var(3) = {vb[320]:.3f}   var(4.5) = {vb[380]:.3f}")
print("-> variance is concentrated near the origin: the implied unit centers")
print("   -bias/weight follow a Cauchy law centered at zero.")
