"""The lifted gradient-graph Laplacian and what it leaves alone.

Run: python demos/01_gradient_graph.py
"""

import numpy as np

from gglr import gradient_graph as gg
from gglr.grid import vectorize

# Three pixels in a row, two gradient nodes joined by a unit-weight edge.
field = gg.GradientField(gg.HORIZONTAL, (1, 2), np.zeros(2))
graph = gg.build_gradient_graph(field, 2, 1.0)
lifted = gg.lift_laplacian(gg.gradient_operator(1, 3, gg.HORIZONTAL), graph.L)
print("lifted Laplacian of a 3-pixel row:")
print(lifted.toarray())
print("read as a signed graph:", gg.signed_graph_weights(lifted))

# On a 2-D grid with uniform weights the regularizer ignores exactly the planes.
M, N = 10, 12
fields = (gg.image_gradient(np.zeros((M, N)), gg.HORIZONTAL), gg.image_gradient(np.zeros((M, N)), gg.VERTICAL))
Lh, Lv = gg.lifted_laplacians(fields, M, N, 4, 1.0)
w = np.linalg.eigvalsh((Lh + Lv).toarray())
print("\nsmallest eigenvalues on a %dx%d grid:" % (M, N), np.round(w[:5], 10))

k, l = np.meshgrid(np.arange(M), np.arange(N), indexing="ij")
plane = vectorize(0.2 + 0.03 * l + 0.01 * k)
bumpy = vectorize(0.2 + 0.03 * l + 0.01 * k + 0.002 * (k - 4.5) ** 2)
print("GGLR of a plane:     %.2e" % gg.gglr_value(plane, Lh, Lv))
print("GGLR of a curved one: %.2e" % gg.gglr_value(bumpy, Lh, Lv))
