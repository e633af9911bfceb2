"""Choosing mu by minimizing the bias-variance MSE bound.

Run: python demos/04_mu_selection.py
"""

import numpy as np

from gglr import synthetic
from gglr.metrics import psnr, random_mask
from gglr.mu_select import SpectralSummary, mse_bound, optimal_mu
from gglr.solver import SolveConfig, interpolate

s = SpectralSummary(K=1024, lam3=0.02, lamK=8.0, sigma_p2=1e-3, sigma_o2=4e-4)
mu_star = optimal_mu(s)
print("bound at a few mu values:")
for mu in (1e-4, 1e-2, mu_star, 1.0, 100.0):
    print("  mu %-10.4g  B %.5f" % (mu, mse_bound(mu, s)))
print("limits: K sigma_o^2 = %.5f, (K-2) sigma_p^2 + 2 sigma_o^2 = %.5f"
      % (s.K * s.sigma_o2, (s.K - 2) * s.sigma_p2 + 2 * s.sigma_o2))

# On an image, mu="auto" estimates the variances and spectrum first. The bound
# is loose for large K, so its minimizer usually sits at an end of the range.
rng = np.random.default_rng(2)
img = synthetic.wedge(32, 32)
noisy = np.clip(img + 0.02 * rng.standard_normal(img.shape), 0, 1)
mask = random_mask(32, 32, 0.6, 2)
for mu in (1e-3, 0.01, 0.1, "auto"):
    rep = interpolate(noisy * mask, mask, SolveConfig(mu=mu))
    print("mu %-6s -> used %.4g, PSNR %.2f dB" % (mu, rep.mu, psnr(img, np.clip(rep.image, 0, 1))))
