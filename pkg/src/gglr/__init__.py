"""Image interpolation with a gradient graph Laplacian regularizer (GGLR)."""

from .grid import devectorize, selection_matrix, vectorize
from .gradient_graph import (build_gradient_graph, edge_weight, gglr_value, gradient_operator,
                             lift_laplacian)
from .metrics import psnr, random_mask, ssim
from .mu_select import SpectralSummary, extreme_eigenvalues, mse_bound, mse_exact, optimal_mu
from .solver import SolveConfig, SolveReport, conjugate_gradient, glr_interpolate, interpolate
from .structure_tensor import estimate_gradient_field

__version__ = "0.1.0"
