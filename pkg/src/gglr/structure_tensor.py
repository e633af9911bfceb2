"""Gradient estimation from partially observed pixels via structure tensors.

Only gradients whose two defining pixels are both known are used. At each
pixel the 2x2 tensor averages ``(gh^2, gh*gv, gv^2)`` over the window offsets
where both directional gradients are available. The dominant eigenvector,
scaled by the square root of its eigenvalue and oriented along the window's
mean gradient, is the local gradient estimate.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .gradient_graph import HORIZONTAL, VERTICAL, GradientField, gradient_shape
from .grid import as_mask, vectorize


@dataclass(frozen=True)
class StructureTensor:
    hh: float
    hv: float
    vv: float
    count: int

    def as_matrix(self):
        return np.array([[self.hh, self.hv], [self.hv, self.vv]])


def observable_gradients(img, mask, direction):
    """Gradients with a validity flag: valid iff both defining pixels are known."""
    img = np.asarray(img, dtype=float)
    known = as_mask(mask)
    if direction == HORIZONTAL:
        G = img[:, 1:] - img[:, :-1]
        ok = known[:, 1:] & known[:, :-1]
    elif direction == VERTICAL:
        G = img[1:, :] - img[:-1, :]
        ok = known[1:, :] & known[:-1, :]
    else:
        raise ValueError("direction must be 'horizontal' or 'vertical', got %r" % (direction,))
    G = np.where(ok, G, 0.0)
    return GradientField(direction, G.shape, vectorize(G), vectorize(ok).astype(bool))


def _pixel_aligned(gh, gv):
    """Place both gradient fields on the (M-1) x (N-1) grid of pixels having both."""
    Mh, Nh = gh.shape
    Mv, Nv = gv.shape
    M, N = Mh, Nv
    H = gh.as_grid()[: M - 1, :]
    V = gv.as_grid()[:, : N - 1]
    ok = gh.valid.reshape(gh.shape, order="F")[: M - 1, :] & gv.valid.reshape(gv.shape, order="F")[:, : N - 1]
    return H, V, ok, (M, N)


def _window_sum(a, window, shape):
    """Sum of ``a`` over a window x window box centred at every pixel of ``shape``.

    ``a`` covers the top-left (M-1) x (N-1) pixels; the rest counts as zero.
    """
    full = np.zeros(shape)
    full[: a.shape[0], : a.shape[1]] = a
    return ndimage.correlate(full, np.ones((window, window)), mode="constant", cval=0.0)


def _check_window(window):
    if window < 1 or window % 2 != 1:
        raise ValueError("window must be an odd integer >= 1, got %r" % (window,))


def tensor_fields(gh, gv, window):
    """Per-pixel tensor sums, mean gradient and sample counts as (M, N) arrays."""
    _check_window(window)
    H, V, ok, shape = _pixel_aligned(gh, gv)
    H = np.where(ok, H, 0.0)
    V = np.where(ok, V, 0.0)
    count = np.rint(_window_sum(ok.astype(float), window, shape)).astype(int)
    sums = {
        "hh": _window_sum(H * H, window, shape),
        "hv": _window_sum(H * V, window, shape),
        "vv": _window_sum(V * V, window, shape),
        "h": _window_sum(H, window, shape),
        "v": _window_sum(V, window, shape),
    }
    denom = np.maximum(count, 1)
    means = {key: np.where(count > 0, s / denom, 0.0) for key, s in sums.items()}
    return means, count


def structure_tensor_at(p, gh, gv, window):
    """Tensor at pixel p = (k, l), 0-based, averaged over valid window offsets."""
    _check_window(window)
    H, V, ok, (M, N) = _pixel_aligned(gh, gv)
    k, l = p
    r = window // 2
    hh = hv = vv = 0.0
    n = 0
    for dk in range(-r, r + 1):
        for dl in range(-r, r + 1):
            a, b = k + dk, l + dl
            if 0 <= a < M - 1 and 0 <= b < N - 1 and ok[a, b]:
                hh += H[a, b] * H[a, b]
                hv += H[a, b] * V[a, b]
                vv += V[a, b] * V[a, b]
                n += 1
    if n == 0:
        return StructureTensor(0.0, 0.0, 0.0, 0)
    return StructureTensor(hh / n, hv / n, vv / n, n)


def dominant_eigenpair(hh, hv, vv):
    """Largest eigenvalue and unit eigenvector of [[hh, hv], [hv, vv]], elementwise.

    Closed form; arguments may be arrays.
    """
    hh, hv, vv = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (hh, hv, vv)))
    half_tr = 0.5 * (hh + vv)
    lam = half_tr + np.hypot(0.5 * (hh - vv), hv)
    # pick the better-conditioned of the two eigenvector formulas
    use_first = hh >= vv
    ex = np.where(use_first, lam - vv, hv)
    ey = np.where(use_first, hv, lam - hh)
    # rescale first so subnormal entries survive normalization
    big = np.maximum(np.abs(ex), np.abs(ey))
    degenerate = big == 0
    big = np.where(degenerate, 1.0, big)
    ex, ey = ex / big, ey / big
    safe = np.where(degenerate, 1.0, np.hypot(ex, ey))
    ex = np.where(degenerate, np.where(use_first, 1.0, 0.0), ex / safe)
    ey = np.where(degenerate, np.where(use_first, 0.0, 1.0), ey / safe)
    return lam, ex, ey


def _orient(ex, ey, mh, mv):
    dot = ex * mh + ey * mv
    flip = (dot < 0) | ((dot == 0) & ((ex < 0) | ((ex == 0) & (ey < 0))))
    s = np.where(flip, -1.0, 1.0)
    return s * ex, s * ey


def dominant_gradient(S, mean_gradient=(0.0, 0.0)):
    """sqrt(lambda_max) * e with e oriented to agree with the mean window gradient."""
    hh, hv, vv = (S.hh, S.hv, S.vv) if isinstance(S, StructureTensor) else (S[0][0], S[0][1], S[1][1])
    lam, ex, ey = dominant_eigenpair(hh, hv, vv)
    ex, ey = _orient(ex, ey, mean_gradient[0], mean_gradient[1])
    mag = np.sqrt(np.maximum(lam, 0.0))
    return float(mag * ex), float(mag * ey)


def pixel_gradient_estimates(gh, gv, window):
    """Structure-tensor gradient estimate at every pixel; zero where no samples."""
    means, count = tensor_fields(gh, gv, window)
    lam, ex, ey = dominant_eigenpair(means["hh"], means["hv"], means["vv"])
    ex, ey = _orient(ex, ey, means["h"], means["v"])
    mag = np.sqrt(np.maximum(lam, 0.0))
    est_h = np.where(count > 0, mag * ex, 0.0)
    est_v = np.where(count > 0, mag * ey, 0.0)
    return est_h, est_v, count


def estimate_gradient_field(img, mask, window=5):
    """Complete horizontal and vertical gradient fields for a masked image.

    Observable nodes keep their direct difference. Every other node takes
    the tensor estimate at the pixel it is indexed by (its left / upper
    pixel), or 0 if that tensor has no samples.
    """
    img = np.asarray(img, dtype=float)
    M, N = img.shape
    gh = observable_gradients(img, mask, HORIZONTAL)
    gv = observable_gradients(img, mask, VERTICAL)
    est_h, est_v, _ = pixel_gradient_estimates(gh, gv, window)
    out = []
    for field, est in ((gh, est_h), (gv, est_v)):
        R, C = gradient_shape(M, N, field.direction)
        fill = vectorize(est[:R, :C])
        values = np.where(field.valid, field.values, fill)
        out.append(GradientField(field.direction, field.shape, values))
    return tuple(out)
