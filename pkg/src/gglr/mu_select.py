"""Bias-variance MSE bound for the GGLR denoiser and the mu that minimizes it.

For ``x* = (I + mu L) y`` with ``y = x + z``, ``z ~ N(0, s_o^2 I)`` and a
lifted Laplacian ``L`` whose two smallest eigenvalues are zero,

    MSE(mu) = sum_{i>=3} q_i^2 (v_i^T xbar)^2 + s_o^2 sum_i h_i^2,
    q_i = 1 / (1 + 1/(mu lam_i)),  h_i = 1 / (1 + mu lam_i),

and replacing ``(v_i^T xbar)^2`` by the perturbation variance ``s_p^2``
gives the upper bound

    B(mu) = (K-2) s_p^2 / (1 + 1/(mu lam_K))^2 + ((K-2)/(1 + mu lam_3)^2 + 2) s_o^2.
"""

from dataclasses import dataclass
import math

import numpy as np

from .grid import is_symmetric

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class SpectralSummary:
    K: int
    lam3: float
    lamK: float
    sigma_p2: float
    sigma_o2: float

    def __post_init__(self):
        if self.K < 3:
            raise ValueError("K must be at least 3")
        if not 0 <= self.lam3 <= self.lamK:
            raise ValueError("need 0 <= lam3 <= lamK")
        if self.sigma_p2 < 0 or self.sigma_o2 < 0:
            raise ValueError("variances must be nonnegative")


def _check_mu(mu):
    if np.any(np.asarray(mu) <= 0):
        raise ValueError("mu must be positive")


def mse_exact(mu, eigenvalues, projections, sigma_o2):
    """Exact MSE given the nonzero eigenvalues lam_3..lam_K of L and the
    projections v_i^T xbar of the mean-removed clean signal onto them."""
    _check_mu(mu)
    lam = np.asarray(eigenvalues, dtype=float)
    proj = np.asarray(projections, dtype=float)
    q = mu * lam / (1.0 + mu * lam)
    h = 1.0 / (1.0 + mu * lam)
    bias2 = np.sum(q * q * proj * proj)
    # h_1 = h_2 = 1 for the two null-space eigenvalues
    variance = sigma_o2 * (2.0 + np.sum(h * h))
    return float(bias2 + variance)


def mse_bound(mu, s):
    _check_mu(mu)
    a = mu * s.lamK / (1.0 + mu * s.lamK)
    h3 = 1.0 / (1.0 + mu * s.lam3)
    return (s.K - 2) * s.sigma_p2 * a * a + ((s.K - 2) * h3 * h3 + 2.0) * s.sigma_o2


def mse_bound_derivative(mu, s):
    """dB/dmu in closed form."""
    _check_mu(mu)
    uK = mu * s.lamK
    u3 = mu * s.lam3
    bias = 2.0 * (s.K - 2) * s.sigma_p2 * uK * s.lamK / (1.0 + uK) ** 3
    var = -2.0 * (s.K - 2) * s.sigma_o2 * s.lam3 / (1.0 + u3) ** 3
    return bias + var


def optimal_mu(s, mu_range=(1e-6, 1e3), rtol=1e-12, maxiter=500, scan=256):
    """Minimize the MSE bound over [mu_min, mu_max].

    dB/dmu is scanned on a log grid; every bracket where it goes from
    negative to positive is refined by bisection in log(mu), and the best
    of those roots and the two endpoints wins. The bound need not be
    unimodal, so an interior stationary point can lose to an endpoint.
    Golden-section search on B is the fallback when no bracket exists
    but the derivative is not of one sign.
    """
    lo, hi = (float(v) for v in mu_range)
    if not 0 < lo < hi:
        raise ValueError("mu_range must satisfy 0 < mu_min < mu_max")
    grid = np.geomspace(lo, hi, scan)
    grid[0], grid[-1] = lo, hi
    d = np.array([mse_bound_derivative(m, s) for m in grid])
    candidates = [lo, hi]
    for i in np.flatnonzero((d[:-1] < 0) & (d[1:] >= 0)):
        candidates.append(_bisect(s, grid[i], grid[i + 1], rtol, maxiter))
    if len(candidates) == 2 and not (np.all(d >= 0) or np.all(d <= 0)):
        candidates.append(_golden(s, lo, hi, rtol, maxiter))
    return min(candidates, key=lambda m: (mse_bound(m, s), m))


def _bisect(s, lo, hi, rtol, maxiter):
    a, b = math.log(lo), math.log(hi)
    for _ in range(maxiter):
        if b - a <= rtol:
            break
        m = 0.5 * (a + b)
        if mse_bound_derivative(math.exp(m), s) < 0:
            a = m
        else:
            b = m
    return math.exp(0.5 * (a + b))


def _golden(s, lo, hi, rtol, maxiter):
    a, b = math.log(lo), math.log(hi)
    f = lambda t: mse_bound(math.exp(t), s)
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if b - a <= rtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    best = min((f(a), a), (f(b), b), (f(0.5 * (a + b)), 0.5 * (a + b)))
    return math.exp(best[1])


# -- spectra ----------------------------------------------------------------

def power_iteration(A, x0, tol=1e-8, maxit=100000, deflate=None):
    """Largest eigenvalue of symmetric PSD A by power iteration.

    Converged when successive Rayleigh quotients differ by <= tol relative.
    ``deflate`` is an orthonormal column basis projected out each step.
    """
    x = np.asarray(x0, dtype=float).copy()

    def project(v):
        if deflate is not None:
            v = v - deflate @ (deflate.T @ v)
        return v

    x = project(x)
    x /= np.linalg.norm(x)
    rq = x @ (A @ x)
    for _ in range(maxit):
        y = project(A @ x)
        ny = np.linalg.norm(y)
        if ny == 0:
            return 0.0
        x = y / ny
        rq_new = x @ (A @ x)
        if abs(rq_new - rq) <= tol * max(abs(rq_new), 1e-300):
            return float(rq_new)
        rq = rq_new
    return float(rq)


def _null_basis(n, shape):
    if shape is None:
        t = np.arange(n, dtype=float)
        cols = [np.ones(n), t]
    else:
        M, N = shape
        k, l = np.meshgrid(np.arange(M, dtype=float), np.arange(N, dtype=float), indexing="ij")
        cols = [np.ones(n), l.ravel(order="F"), k.ravel(order="F")]
    Q, _ = np.linalg.qr(np.column_stack(cols))
    return Q


def extreme_eigenvalues(L, shape=None, dense_limit=4096, null_rtol=1e-9, tol=1e-8, seed=0):
    """(lam3, lamK): smallest eigenvalue above the numerical null space, and the largest.

    ``shape`` = (M, N) marks L as a 2-D pixel-domain Laplacian (3-dim planar
    null space); otherwise L is treated as 1-D (null space {1, ramp}).
    """
    if not is_symmetric(L, rtol=1e-10):
        raise ValueError("extreme_eigenvalues needs a symmetric matrix")
    n = L.shape[0]
    if n <= dense_limit:
        A = L.toarray() if hasattr(L, "toarray") else np.asarray(L, dtype=float)
        ev = np.linalg.eigvalsh(0.5 * (A + A.T))
        lamK = float(ev[-1])
        above = ev[ev > null_rtol * max(lamK, 0.0)]
        lam3 = float(above[0]) if above.size else 0.0
        return lam3, lamK
    rng = np.random.default_rng(seed)
    lamK = power_iteration(L, rng.standard_normal(n), tol=tol)
    Q = _null_basis(n, shape)
    shifted = _Shifted(L, lamK)
    top = power_iteration(shifted, rng.standard_normal(n), tol=tol, deflate=Q)
    return float(max(lamK - top, 0.0)), lamK


class _Shifted:
    """lamK * I - L as a matvec-only operator."""

    def __init__(self, L, lamK):
        self.L = L
        self.lamK = lamK

    def __matmul__(self, x):
        return self.lamK * x - self.L @ x


# -- automatic mu for masked images -------------------------------------------

def estimate_variances(img, mask):
    """Heuristic (sigma_p2, sigma_o2) from the known pixels.

    Noise: for a locally planar signal with iid noise of variance s^2, a
    second difference x[l-1] - 2 x[l] + x[l+1] has variance 6 s^2; a robust
    (MAD) scale of those differences gives s^2. Planar deviation: variance of
    the residual after a least-squares plane fit to all known pixels, less
    the noise part, i.e. the signal energy outside the planar null space.
    """
    img = np.asarray(img, dtype=float)
    known = np.asarray(mask, dtype=bool)
    d = []
    for a, k in ((img, known), (img.T, known.T)):
        ok = k[:, :-2] & k[:, 1:-1] & k[:, 2:]
        d.append((a[:, :-2] - 2 * a[:, 1:-1] + a[:, 2:])[ok])
    d = np.concatenate(d)
    if d.size < 2:
        return 0.0, 0.0
    mad = np.median(np.abs(d - np.median(d)))
    sigma_o2 = (1.4826 * mad) ** 2 / 6.0

    rows, cols = np.nonzero(known)
    A = np.column_stack([np.ones(rows.size), cols, rows])
    y = img[known]
    resid = y - A @ np.linalg.lstsq(A, y, rcond=None)[0]
    sigma_p2 = max(float(np.var(resid)) - sigma_o2, 0.0)
    return float(sigma_p2), float(sigma_o2)


def auto_mu(img, mask, L, sigma_p2=None, sigma_o2=None, mu_range=(1e-6, 1e3)):
    """mu minimizing the bound for a 2-D pixel-domain Laplacian L.

    The bound is derived for a fully observed 1-D signal; applying it to a
    masked image is an extrapolation.
    """
    M, N = np.shape(img)
    est_p, est_o = estimate_variances(img, mask)
    sp2 = est_p if sigma_p2 is None else sigma_p2
    so2 = est_o if sigma_o2 is None else sigma_o2
    lam3, lamK = extreme_eigenvalues(L, shape=(M, N))
    s = SpectralSummary(M * N, lam3, lamK, sp2, so2)
    return optimal_mu(s, mu_range)
