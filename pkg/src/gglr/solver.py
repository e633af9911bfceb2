"""Interpolation of missing pixels by iteratively reweighted GGLR / GLR.

Each outer iteration freezes the edge weights and solves

    (H^T H + mu * (Lh + Lv)) x = H^T y

with conjugate gradient, warm-started from the previous iterate. The weights
are then rebuilt from the gradients of the new solution.
"""

import logging
import time
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp

from . import gradient_graph as gg
from .grid import (DimensionError, ObservationError, as_mask, canonical, devectorize, is_symmetric,
                   known_indices, selection_matrix, vectorize)
from .structure_tensor import estimate_gradient_field

log = logging.getLogger(__name__)


class ConvergenceWarning(UserWarning):
    pass


class NumericalBreakdown(ArithmeticError):
    pass


@dataclass
class SolveConfig:
    sigma: float = 0.68
    mu: object = 0.01  # float, or "auto"
    window: int = 5
    connectivity: int = 4
    cg_tol: float = 1e-8
    cg_maxit: int = None  # None -> 10 * M * N
    outer_tol: float = 1e-4
    outer_maxit: int = 10
    seed: int = 0
    preconditioner: str = None  # None or "jacobi"
    sigma_p2: float = None  # used by mu="auto"; estimated when None
    sigma_o2: float = None

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.mu != "auto" and not float(self.mu) > 0:
            raise ValueError("mu must be positive or 'auto'")
        if self.window < 1 or self.window % 2 != 1:
            raise ValueError("window must be an odd positive integer")
        if self.connectivity not in (2, 4):
            raise ValueError("connectivity must be 2 or 4")
        if self.cg_tol <= 0 or self.outer_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.outer_maxit < 1 or (self.cg_maxit is not None and self.cg_maxit < 1):
            raise ValueError("iteration caps must be positive")
        if self.preconditioner not in (None, "jacobi"):
            raise ValueError("preconditioner must be None or 'jacobi'")

    def to_dict(self):
        return asdict(self)


@dataclass
class SolveReport:
    image: np.ndarray
    outer_iterations: int
    cg_iterations: list = field(default_factory=list)
    residual: float = 0.0
    objective: float = 0.0
    regularizer: float = 0.0
    mu: float = 0.0
    converged: bool = True
    cg_maxit_hit: bool = False
    wall_time: float = 0.0

    def summary(self):
        return {
            "outer_iterations": self.outer_iterations,
            "cg_iterations": list(self.cg_iterations),
            "residual": self.residual,
            "objective": self.objective,
            "regularizer": self.regularizer,
            "mu": self.mu,
            "converged": self.converged,
            "cg_maxit_hit": self.cg_maxit_hit,
            "wall_time": self.wall_time,
        }


def conjugate_gradient(B, b, x0=None, tol=1e-8, maxit=None, precond=None):
    """Solve B x = b for symmetric positive (semi-)definite sparse B.

    Stops when ||B x - b|| / ||b|| <= tol. Returns (x, iterations, relative
    residual); a ConvergenceWarning is issued if maxit is reached first.
    ``precond`` is an optional vector of inverse diagonal entries.
    """
    if B.shape[0] != B.shape[1] or B.shape[0] != np.size(b):
        raise DimensionError("system matrix %r incompatible with rhs of length %d" % (B.shape, np.size(b)))
    b = np.asarray(b, dtype=float)
    if not (np.isfinite(B.data).all() and np.isfinite(b).all()):
        raise NumericalBreakdown("numerical breakdown: non-finite system")
    if not is_symmetric(B):
        raise ValueError("conjugate gradient needs a symmetric matrix")
    n = b.size
    maxit = 10 * n if maxit is None else maxit
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0, 0.0

    r = b - B @ x
    z = r if precond is None else precond * r
    p = z.copy()
    rz = r @ z
    res = np.linalg.norm(r) / bnorm
    it = 0
    while res > tol and it < maxit:
        Bp = B @ p
        curv = p @ Bp
        if not np.isfinite(curv):
            raise NumericalBreakdown("numerical breakdown")
        if curv <= 1e-300 * max(p @ p, 1e-300):
            raise ObservationError("insufficient observations: zero curvature at residual %.3g" % res)
        alpha = rz / curv
        x += alpha * p
        r -= alpha * Bp
        z = r if precond is None else precond * r
        rz_new = r @ z
        p *= rz_new / rz
        p += z
        rz = rz_new
        res = np.linalg.norm(r) / bnorm
        it += 1
        if not np.isfinite(res):
            raise NumericalBreakdown("numerical breakdown")

    if res > tol:
        warnings.warn("CG stopped after %d iterations at relative residual %.3g" % (it, res),
                      ConvergenceWarning, stacklevel=2)
    return x, it, float(res)


def assemble_system(H, Lh, Lv, mu, y):
    """B = H^T H + mu (Lh + Lv) and b = H^T y."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    n = H.shape[1]
    if Lh.shape != (n, n) or Lv.shape != (n, n) or H.shape[0] != np.size(y):
        raise DimensionError("incompatible system dimensions")
    HtH = canonical(H.T @ H)
    B = canonical(HtH + mu * (Lh + Lv))
    b = H.T @ np.asarray(y, dtype=float)
    return B, b


def objective(H, Lreg, mu, x, y):
    r = H @ x - y
    return float(r @ r) + mu * gg.quadratic_form(Lreg, x)


def null_space_basis(M, N, connectivity):
    """Columns spanning the regularizer's null space for uniform weights.

    4-connected: constant, column ramp and row ramp. 2-connected gradient
    graphs only couple along each gradient's own axis, so the bilinear
    term k*l is also annihilated.
    """
    k, l = np.meshgrid(np.arange(M, dtype=float), np.arange(N, dtype=float), indexing="ij")
    cols = [np.ones(M * N), vectorize(l), vectorize(k)]
    if connectivity == 2:
        cols.append(vectorize(k * l))
    return np.column_stack(cols)


def check_observations(mask, connectivity):
    idx = known_indices(mask)
    if idx.size == 0:
        raise ObservationError("no observations")
    M, N = mask.shape
    basis = null_space_basis(M, N, connectivity)[idx]
    if np.linalg.matrix_rank(basis) < basis.shape[1]:
        raise ObservationError("insufficient observations: known pixels do not pin down a plane")


def _prepare(y, mask):
    mask = as_mask(mask)
    M, N = mask.shape
    if M < 2 or N < 2:
        raise DimensionError("image must be at least 2x2")
    y = np.asarray(y, dtype=float)
    if y.shape == mask.shape:
        y = vectorize(y)[known_indices(mask)]
    elif y.ndim != 1 or y.size != int(mask.sum()):
        raise DimensionError("observations must be an image of the mask's shape or a vector of K values")
    return y, mask


def _resolve_mu(config, img0, mask, Lreg):
    if config.mu != "auto":
        return float(config.mu)
    from . import mu_select
    return mu_select.auto_mu(img0, mask, Lreg, sigma_p2=config.sigma_p2, sigma_o2=config.sigma_o2)


def _outer_loop(y, mask, config, build_regularizer, initial_regularizer):
    t0 = time.perf_counter()
    M, N = mask.shape
    H = selection_matrix(mask)
    x = H.T @ y
    img0 = devectorize(x, M, N)
    Lreg = initial_regularizer(img0)
    mu = _resolve_mu(config, img0, mask, Lreg)
    HtH_diag = np.asarray(H.T @ np.ones(H.shape[0])).ravel()
    maxit = config.cg_maxit or 10 * M * N

    cg_iters = []
    converged = False
    maxit_hit = False
    res = 0.0
    for t in range(config.outer_maxit):
        if t > 0:
            Lreg = build_regularizer(devectorize(x, M, N))
        B = canonical(sp.diags(HtH_diag, format="csr") + mu * Lreg)
        b = H.T @ y
        precond = None
        if config.preconditioner == "jacobi":
            d = B.diagonal()
            precond = np.where(d > 0, 1.0 / np.where(d > 0, d, 1.0), 1.0)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ConvergenceWarning)
            x_new, it, res = conjugate_gradient(B, b, x0=x, tol=config.cg_tol, maxit=maxit, precond=precond)
        if caught:
            maxit_hit = True
            log.warning("outer iteration %d: %s", t + 1, caught[0].message)
        cg_iters.append(it)
        xnorm = np.linalg.norm(x)
        change = np.linalg.norm(x_new - x) / xnorm if xnorm > 0 else np.inf
        if xnorm == 0 and np.linalg.norm(x_new) == 0:
            change = 0.0
        x = x_new
        log.debug("outer %d: cg %d its, residual %.2e, change %.2e", t + 1, it, res, change)
        if change < config.outer_tol:
            converged = True
            break

    reg = gg.quadratic_form(Lreg, x)
    rep = SolveReport(
        image=devectorize(x, M, N),
        outer_iterations=len(cg_iters),
        cg_iterations=cg_iters,
        residual=res,
        objective=objective(H, Lreg, mu, x, y),
        regularizer=reg,
        mu=mu,
        converged=converged,
        cg_maxit_hit=maxit_hit,
    )
    rep.wall_time = time.perf_counter() - t0
    return rep


def gglr_regularizer(img, connectivity, sigma, fields=None):
    """Lh + Lv built from the gradients of a complete image (or given fields)."""
    M, N = img.shape
    if fields is None:
        fields = (gg.image_gradient(img, gg.HORIZONTAL), gg.image_gradient(img, gg.VERTICAL))
    Lh, Lv = gg.lifted_laplacians(fields, M, N, connectivity, sigma)
    return canonical(Lh + Lv)


def interpolate(y, mask, config=None):
    """Restore missing pixels by minimizing ||Hx - y||^2 + mu * GGLR(x).

    ``y`` is either the degraded image (values at unknown pixels ignored) or
    the vector of the K known values in column-major order. The returned
    image is unclamped; clamp when serializing.
    """
    config = config or SolveConfig()
    y, mask = _prepare(y, mask)
    check_observations(mask, config.connectivity)

    def initial(img0):
        fields = estimate_gradient_field(img0, mask, config.window)
        return gglr_regularizer(img0, config.connectivity, config.sigma, fields)

    def rebuild(img):
        return gglr_regularizer(img, config.connectivity, config.sigma)

    return _outer_loop(y, mask, config, rebuild, initial)


def pixel_graph_laplacian(img, sigma, known=None):
    """4-connected pixel graph with weights exp(-(x_i - x_j)^2 / sigma^2).

    If ``known`` is given, edges touching an unknown pixel get weight 1.
    """
    img = np.asarray(img, dtype=float)
    x = vectorize(img)
    i, j = gg.grid_edges(img.shape, (0, 1))
    w = gg.edge_weight(x[i], x[j], sigma)
    if known is not None:
        kv = vectorize(as_mask(known)).astype(bool)
        w = np.where(kv[i] & kv[j], w, 1.0)
    _, L = gg.laplacian_from_edges(x.size, i, j, w)
    return L


def glr_interpolate(y, mask, config=None):
    """Baseline: same outer loop with a signal-dependent pixel-graph Laplacian."""
    config = config or SolveConfig()
    y, mask = _prepare(y, mask)
    if not mask.any():
        raise ObservationError("no observations")
    if config.mu == "auto":
        raise ValueError("automatic mu is only defined for the gradient-graph regularizer")

    def initial(img0):
        return pixel_graph_laplacian(img0, config.sigma, known=mask)

    def rebuild(img):
        return pixel_graph_laplacian(img, config.sigma)

    return _outer_loop(y, mask, config, rebuild, initial)
