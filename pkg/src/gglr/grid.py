"""Image rasters, pixel masks and the sparse-matrix kernel.

Images are 2-D float arrays of shape ``(M, N)`` with intensities in [0, 1].
Masks are boolean arrays of the same shape, ``True`` where a pixel is known.
Everything that needs a flat index goes through :func:`pixel_index`, which
stacks columns (``index = k + l*M`` for 0-based row ``k`` and column ``l``).

Sparse matrices are ``scipy.sparse.csr_matrix`` kept in canonical form
(duplicates summed, explicit zeros removed, column indices sorted) so that
products and matvecs are bitwise reproducible.
"""

import numpy as np
import scipy.sparse as sp


class DimensionError(ValueError):
    pass


class ObservationError(ValueError):
    pass


def pixel_index(k, l, M):
    """Flat column-major index of pixel (k, l) in an image with M rows."""
    return np.asarray(k) + np.asarray(l) * M


def vectorize(img):
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise DimensionError("image must be 2-D, got shape %r" % (img.shape,))
    return img.reshape(-1, order="F").copy()


def devectorize(x, M, N):
    x = np.asarray(x, dtype=float)
    if x.size != M * N:
        raise DimensionError("vector of length %d cannot form a %dx%d image" % (x.size, M, N))
    return x.reshape((M, N), order="F").copy()


def as_mask(known):
    known = np.asarray(known, dtype=bool)
    if known.ndim != 2:
        raise DimensionError("mask must be 2-D, got shape %r" % (known.shape,))
    return known


def known_indices(mask):
    """Column-major indices of known pixels, ascending."""
    return np.flatnonzero(vectorize(as_mask(mask)).astype(bool))


def selection_matrix(mask):
    """K x MN matrix H picking the known pixels in column-major order."""
    mask = as_mask(mask)
    idx = known_indices(mask)
    K = idx.size
    if K == 0:
        raise ObservationError("no observations")
    H = sp.csr_matrix((np.ones(K), (np.arange(K), idx)), shape=(K, mask.size))
    return canonical(H)


# -- sparse kernel ----------------------------------------------------------

def canonical(A):
    """CSR, float64, no duplicates or stored zeros, sorted indices.

    Already-CSR float input is canonicalized in place (same matrix value).
    """
    if not (sp.isspmatrix_csr(A) and A.dtype == np.float64):
        A = sp.csr_matrix(A, dtype=float)
    A.sum_duplicates()
    A.eliminate_zeros()
    A.sort_indices()
    return A


def coo_to_csr(rows, cols, vals, shape):
    """Canonical CSR from triplets; duplicates are summed, zeros dropped."""
    R, C = shape
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    key, inv = np.unique(rows * C + cols, return_inverse=True)
    data = np.bincount(inv.ravel(), weights=np.asarray(vals, dtype=float), minlength=key.size)
    keep = data != 0
    key, data = key[keep], data[keep]
    indptr = np.zeros(R + 1, dtype=np.int64)
    np.cumsum(np.bincount(key // C, minlength=R), out=indptr[1:])
    A = sp.csr_matrix((data, key % C, indptr), shape=shape)
    A.has_sorted_indices = True
    A.has_canonical_format = True
    return A


def _check_same_shape(A, B):
    if A.shape != B.shape:
        raise DimensionError("shape mismatch: %r vs %r" % (A.shape, B.shape))


def sparse_matvec(A, x):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != A.shape[1]:
        raise DimensionError("cannot multiply %r matrix by vector of length %d" % (A.shape, x.size))
    return A @ x


def sparse_add(A, B):
    _check_same_shape(A, B)
    return canonical(A + B)


def sparse_scale(A, c):
    return canonical(A * float(c))


def sparse_transpose(A):
    return canonical(A.T)


# below this many dense entries numpy beats scipy's per-call overhead
SMALL_DENSE = 4096


def sparse_triple_product(F, L):
    """Canonical form of F^T L F."""
    if L.shape[0] != L.shape[1] or F.shape[0] != L.shape[0]:
        raise DimensionError("incompatible shapes for F^T L F: F %r, L %r" % (F.shape, L.shape))
    if F.shape[0] * F.shape[1] <= SMALL_DENSE:
        Fd = F.toarray()
        return canonical(sp.csr_matrix(Fd.T @ L.toarray() @ Fd))
    return canonical(F.T @ (L @ F))


def symmetrize(A):
    if A.shape[0] * A.shape[1] <= SMALL_DENSE:
        D = A.toarray()
        return canonical(sp.csr_matrix(0.5 * (D + D.T)))
    return canonical(0.5 * (A + A.T))


def is_symmetric(A, rtol=1e-12):
    if A.shape[0] != A.shape[1]:
        return False
    diff = abs(A - A.T)
    scale = abs(A).max() if A.nnz else 0.0
    return diff.nnz == 0 or diff.max() <= rtol * max(scale, 1.0)
