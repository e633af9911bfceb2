"""Image quality metrics and deterministic degradation masks."""

import math

import numpy as np
from scipy import ndimage

from .grid import DimensionError

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_C1 = 0.01 ** 2
SSIM_C2 = 0.03 ** 2


def _pair(reference, test):
    a = np.asarray(reference, dtype=float)
    b = np.asarray(test, dtype=float)
    if a.shape != b.shape:
        raise DimensionError("images differ in shape: %r vs %r" % (a.shape, b.shape))
    return a, b


def psnr(reference, test):
    """PSNR in dB for intensities in [0, 1]; inf for identical images."""
    a, b = _pair(reference, test)
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def gaussian_window(size=SSIM_WINDOW, sigma=SSIM_SIGMA):
    r = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(r * r) / (2.0 * sigma * sigma))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(reference, test):
    """Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5)."""
    a, b = _pair(reference, test)
    if a.ndim != 2 or min(a.shape) < SSIM_WINDOW:
        raise DimensionError("SSIM needs 2-D images of at least %dx%d" % (SSIM_WINDOW, SSIM_WINDOW))
    w = gaussian_window()
    pad = SSIM_WINDOW // 2

    def filt(z):
        return ndimage.correlate(z, w, mode="constant")[pad:-pad, pad:-pad]

    mu_a, mu_b = filt(a), filt(b)
    va = filt(a * a) - mu_a * mu_a
    vb = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + SSIM_C1) * (2 * cov + SSIM_C2)
    den = (mu_a ** 2 + mu_b ** 2 + SSIM_C1) * (va + vb + SSIM_C2)
    return float(np.mean(num / den))


# -- masks --------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _uniform_below(bits, bound):
    """Map a 64-bit draw to [0, bound) by rejection; None means redraw."""
    limit = (_MASK64 + 1) - ((_MASK64 + 1) % bound)
    if bits >= limit:
        return None
    return bits % bound


def fisher_yates(n, seed):
    """Permutation of range(n) by Fisher-Yates driven by raw PCG64 output.

    Index i (from n-1 down to 1) swaps with j uniform on [0, i], drawn from
    the next 64-bit PCG64 word by modulo with rejection. Depends only on
    the PCG64 stream, which numpy keeps fixed for a given seed.
    """
    bitgen = np.random.PCG64(seed)
    perm = list(range(n))
    raw = bitgen.random_raw(max(n - 1, 0)).tolist()
    pos = 0
    for i in range(n - 1, 0, -1):
        while True:
            if pos < len(raw):
                bits = raw[pos]
                pos += 1
            else:
                bits = int(bitgen.random_raw())
            j = _uniform_below(bits, i + 1)
            if j is not None:
                break
        perm[i], perm[j] = perm[j], perm[i]
    return np.array(perm, dtype=np.int64)


def missing_count(M, N, fraction):
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must lie in [0, 1], got %r" % (fraction,))
    return int(math.floor(fraction * M * N + 0.5))


def random_mask(M, N, missing_fraction, seed):
    """Known-pixel mask with exactly round(fraction * M * N) missing pixels.

    The missing pixels are the first entries of a seeded Fisher-Yates
    permutation of the column-major pixel indices.
    """
    n_missing = missing_count(M, N, missing_fraction)
    perm = fisher_yates(M * N, seed)
    known = np.ones(M * N, dtype=bool)
    known[perm[:n_missing]] = False
    return known.reshape((M, N), order="F")


def degrade(img, mask):
    """Zero-filled preview: unknown pixels set to 0."""
    return np.where(np.asarray(mask, dtype=bool), np.asarray(img, dtype=float), 0.0)
