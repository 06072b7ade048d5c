"""Analytic prior covariance vs Monte Carlo, and the Gaussian-center contrast.

Evaluates the closed-form covariance of the network prior on a variogram
layout cov(x - h/2, x + h/2), checks it against sampled networks, and shows
the nonstationary envelope of the fixed-width Gaussian-center alternative.
"""
import numpy as np

from porbnet.intensity import HomogeneousIntensity
from porbnet.kernels import cov_homogeneous, cov_williams, empirical_cov
from porbnet.network import Hyperparams

hyper = Hyperparams(s0_sq=1.0, sigma_w_sq=1.0, sigma_b_sq=1.0, region=(-5.0, 5.0))
intens = HomogeneousIntensity(1.0, hyper.region)
rng = np.random.default_rng(1)

print("cov(x - h/2, x + h/2), level 1 on [-5, 5]  (analytic | Monte Carlo):")
header = "  gap " + "".join(f"{x:>16.1f}" for x in (-4.0, -2.0, 0.0, 2.0, 4.0))
print(header)
for gap in (0.0, 1.0, 2.0):
    cells = []
    for x in (-4.0, -2.0, 0.0, 2.0, 4.0):
        a = cov_homogeneous(x - gap / 2, x + gap / 2, hyper, 1.0)
        e = empirical_cov(hyper, intens, x - gap / 2, x + gap / 2, 4000, rng)
        cells.append(f"{a:7.3f}|{e.estimate:6.3f} ")
    print(f"{gap:5.1f} " + "".join(cells))
print("-> rows are flat across x (stationary) and shrink with the gap;")
print("   Monte Carlo over prior draws agrees with the closed form.")

print("\nGaussian-center RBF network (no point process), diagonal cov(x, x):")
for x in (0.0, 1.0, 2.0, 4.0):
    print(f"  x = {x:3.1f}: {cov_williams(x, x, 1.0, 0.5, amplitude=2.0):.4f}")
print("-> the same diagonal decays with |x|: amplitude nonstationarity.")
