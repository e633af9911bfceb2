"""Synthetic test images in [0, 1] (row k, column l, both 1-based in the formulas)."""

import numpy as np


def _grid(M, N):
    return np.meshgrid(np.arange(1, M + 1, dtype=float), np.arange(1, N + 1, dtype=float), indexing="ij")


def plane(M, N, offset=0.2, col_slope=0.03, row_slope=0.01):
    k, l = _grid(M, N)
    return offset + col_slope * l + row_slope * k


def ramp(M, N):
    """Diagonal ramp from 0 at the top-left corner to 1 at the bottom-right."""
    k, l = _grid(M, N)
    return (k + l - 2) / max(M + N - 2, 1)


def two_plane(M, N):
    k, l = _grid(M, N)
    left = 0.1 + 0.02 * l + 0.01 * k
    right = 0.9 - 0.015 * l + 0.005 * k
    return np.clip(np.where(l <= N // 2, left, right), 0.0, 1.0)


def wedge(M, N):
    """Piecewise-planar roof: two planes meeting along a diagonal crease."""
    k, l = _grid(M, N)
    u = (l - 1) / max(N - 1, 1)
    v = (k - 1) / max(M - 1, 1)
    return np.clip(0.15 + 0.7 * np.minimum(u + 0.3 * v, 1.3 - u + 0.2 * v), 0.0, 1.0)


def disc(M, N, radius=0.3):
    """Shaded disc on a tilted background."""
    k, l = _grid(M, N)
    u = (l - 0.5) / N - 0.5
    v = (k - 0.5) / M - 0.5
    inside = u * u + v * v < radius * radius
    return np.where(inside, 0.75 - 0.4 * v, 0.2 + 0.3 * u)


def smooth(M, N):
    k, l = _grid(M, N)
    return 0.5 + 0.3 * np.sin(l / 9.0) * np.cos(k / 13.0) + 0.15 * (l > N / 2)


GALLERY = {"plane": plane, "ramp": ramp, "two_plane": two_plane, "wedge": wedge, "disc": disc, "smooth": smooth}
