"""Gradient operators, gradient graphs and their lifted pixel-domain Laplacians.

A horizontal gradient lives on an ``M x (N-1)`` grid,
``G^h[k, l] = X[k, l+1] - X[k, l]``; a vertical gradient on ``(M-1) x N``,
``G^v[k, l] = X[k+1, l] - X[k, l]``. Both are vectorized column-major.

Nodes of a gradient graph are gradient values. Edges join neighbouring nodes
on the gradient grid with weight ``exp(-(g_i - g_j)**2 / sigma**2)``.
The graph Laplacian ``L`` pulled back through the gradient operator ``F``
gives ``F^T L F``, whose quadratic form penalises deviation from planes.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .grid import DimensionError, canonical, coo_to_csr, sparse_triple_product, symmetrize, vectorize

HORIZONTAL = "horizontal"
VERTICAL = "vertical"

# weights below this are dropped from W
WEIGHT_FLOOR = 1e-8


def _check_direction(direction):
    if direction not in (HORIZONTAL, VERTICAL):
        raise ValueError("direction must be 'horizontal' or 'vertical', got %r" % (direction,))


def gradient_shape(M, N, direction):
    _check_direction(direction)
    return (M, N - 1) if direction == HORIZONTAL else (M - 1, N)


@dataclass(frozen=True)
class GradientField:
    direction: str
    shape: tuple
    values: np.ndarray
    valid: np.ndarray = None

    def __post_init__(self):
        _check_direction(self.direction)
        values = np.asarray(self.values, dtype=float).ravel()
        n = self.shape[0] * self.shape[1]
        if values.size != n:
            raise DimensionError("%s field of shape %r needs %d values, got %d"
                                 % (self.direction, self.shape, n, values.size))
        valid = np.ones(n, dtype=bool) if self.valid is None else np.asarray(self.valid, dtype=bool).ravel()
        if valid.size != n:
            raise DimensionError("validity vector has wrong length")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    def as_grid(self):
        return self.values.reshape(self.shape, order="F")


@dataclass(frozen=True)
class GradientGraph:
    shape: tuple
    connectivity: int
    sigma: float
    W: sp.csr_matrix
    L: sp.csr_matrix

    @property
    def n(self):
        return self.W.shape[0]

    @property
    def degree(self):
        return np.asarray(self.W.sum(axis=1)).ravel()


def gradient_operator(M, N, direction):
    """Sparse F with F @ vec(X) = vec(G) using g = x_next - x_current."""
    R, C = gradient_shape(M, N, direction)
    if R < 1 or C < 1:
        raise DimensionError("%dx%d image has no %s gradients" % (M, N, direction))
    k, l = np.meshgrid(np.arange(R), np.arange(C), indexing="ij")
    k = k.ravel(order="F")
    l = l.ravel(order="F")
    node = k + l * R
    cur = k + l * M
    nxt = cur + (M if direction == HORIZONTAL else 1)
    rows = np.concatenate([node, node])
    cols = np.concatenate([nxt, cur])
    vals = np.concatenate([np.ones(node.size), -np.ones(node.size)])
    return coo_to_csr(rows, cols, vals, (R * C, M * N))


def image_gradient(img, direction):
    img = np.asarray(img, dtype=float)
    if direction == HORIZONTAL:
        G = img[:, 1:] - img[:, :-1]
    else:
        _check_direction(direction)
        G = img[1:, :] - img[:-1, :]
    return GradientField(direction, G.shape, vectorize(G))


def edge_weight(g_i, g_j, sigma):
    if sigma <= 0:
        raise ValueError("sigma must be positive, got %r" % (sigma,))
    d = np.asarray(g_i, dtype=float) - np.asarray(g_j, dtype=float)
    return np.exp(-(d * d) / (sigma * sigma))


def grid_edges(shape, axes):
    """Index pairs (i, j), i < j, of grid neighbours along the given axes.

    Axis 0 pairs vertically adjacent nodes (same column), axis 1 pairs
    horizontally adjacent nodes (same row). Indices are column-major.
    """
    R, C = shape
    idx = np.arange(R * C).reshape((R, C), order="F")
    src, dst = [], []
    if 0 in axes and R > 1:
        src.append(idx[:-1, :].ravel(order="F"))
        dst.append(idx[1:, :].ravel(order="F"))
    if 1 in axes and C > 1:
        src.append(idx[:, :-1].ravel(order="F"))
        dst.append(idx[:, 1:].ravel(order="F"))
    if not src:
        return np.empty(0, dtype=int), np.empty(0, dtype=int)
    return np.concatenate(src), np.concatenate(dst)


def neighbour_axes(direction, connectivity):
    if connectivity == 4:
        return (0, 1)
    if connectivity == 2:
        _check_direction(direction)
        return (1,) if direction == HORIZONTAL else (0,)
    raise ValueError("connectivity must be 2 or 4, got %r" % (connectivity,))


def laplacian_from_edges(n, i, j, w):
    keep = w >= WEIGHT_FLOOR
    i, j, w = i[keep], j[keep], w[keep]
    W = coo_to_csr(np.concatenate([i, j]), np.concatenate([j, i]), np.concatenate([w, w]), (n, n))
    L = coo_to_csr(np.concatenate([i, j, i, j]), np.concatenate([j, i, i, j]),
                   np.concatenate([-w, -w, w, w]), (n, n))
    return W, L


def build_gradient_graph(field, connectivity, sigma):
    """Signal-dependent graph over the nodes of a gradient field.

    4-connected links each node to its up/down/left/right neighbours on the
    gradient grid. 2-connected keeps only the two neighbours along the
    gradient's own axis (left/right for horizontal, up/down for vertical).
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive, got %r" % (sigma,))
    i, j = grid_edges(field.shape, neighbour_axes(field.direction, connectivity))
    w = edge_weight(field.values[i], field.values[j], sigma)
    W, L = laplacian_from_edges(field.values.size, i, j, w)
    return GradientGraph(field.shape, connectivity, float(sigma), W, L)


def lift_laplacian(F, L):
    """Pixel-domain Laplacian F^T L F, symmetrized and canonical."""
    if F.shape[0] != L.shape[0]:
        raise DimensionError("F has %d rows but L is %r" % (F.shape[0], L.shape))
    return symmetrize(sparse_triple_product(F, L))


def lifted_laplacians(fields, M, N, connectivity, sigma):
    """(Lh, Lv) lifted Laplacians for a pair of horizontal/vertical fields."""
    gh, gv = fields
    out = []
    for field in (gh, gv):
        F = gradient_operator(M, N, field.direction)
        graph = build_gradient_graph(field, connectivity, sigma)
        out.append(lift_laplacian(F, graph.L))
    return tuple(out)


def quadratic_form(A, x):
    x = np.asarray(x, dtype=float)
    return float(x @ (A @ x))


def gglr_value(x, Lh, Lv):
    return quadratic_form(Lh, x) + quadratic_form(Lv, x)


def edge_sum(W, g):
    """sum_{i,j} W_ij (g_i - g_j)^2 over each undirected edge once."""
    U = sp.triu(W, k=1).tocoo()
    d = g[U.row] - g[U.col]
    return float(np.sum(U.data * d * d))


def signed_graph_weights(Lift):
    """Read a Laplacian-like matrix as a signed graph: w_ij = -Lift_ij, i < j."""
    U = sp.triu(Lift, k=1).tocoo()
    return {(int(r), int(c)): -float(v) for r, c, v in zip(U.row, U.col, U.data)}
