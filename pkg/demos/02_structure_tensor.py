"""Estimating the gradient of a noisy, half-observed plane.

Raw differences of two noisy pixels have variance 2 * sigma_n^2 per component.
The 5x5 structure tensor pools the observable ones and does much better.

Run: python demos/02_structure_tensor.py
"""

import numpy as np

from gglr import gradient_graph as gg
from gglr.structure_tensor import observable_gradients, pixel_gradient_estimates

rng = np.random.default_rng(0)
M = N = 48
b, c, sn = 0.03, 0.01, 0.05
k, l = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
img = 0.2 + b * l + c * k + sn * rng.standard_normal((M, N))
known = rng.random((M, N)) >= 0.5

gh = observable_gradients(img, known, gg.HORIZONTAL)
gv = observable_gradients(img, known, gg.VERTICAL)
raw = np.concatenate([gh.values[gh.valid] - b, gv.values[gv.valid] - c])
print("observable raw differences: %d horizontal, %d vertical" % (gh.valid.sum(), gv.valid.sum()))
print("raw difference error variance per component: %.5f (2 sigma_n^2 = %.5f)" % (raw.var(), 2 * sn ** 2))

eh, ev, count = pixel_gradient_estimates(gh, gv, 5)
sel = count > 0
err = (eh[sel] - b) ** 2 + (ev[sel] - c) ** 2
print("tensor estimate squared error, both components: %.5f (4 sigma_n^2 = %.5f)" % (err.mean(), 4 * sn ** 2))
# sqrt(lambda_max) also carries noise energy, so magnitudes run high at this SNR.
print("median estimate: (%.4f, %.4f) vs true (%.3f, %.3f)" % (np.median(eh[sel]), np.median(ev[sel]), b, c))
