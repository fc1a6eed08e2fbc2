"""Minimal dense linear algebra: pseudoinverse via QR, weighted inner products.

Convention used throughout the package: matrices are 2-D C-order (row-major)
float64 numpy arrays, indexed from zero; vectors are 1-D float64 arrays.
"""

import numpy as np
from scipy.linalg import solve_triangular


class RankDeficientError(ValueError):
    """The design matrix has numerical column rank below its column count."""


def as_matrix(X):
    """Validate and convert to a 2-D C-order float64 array with finite entries."""
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix entries must be finite")
    return X


def as_vector(v, length=None):
    """Validate and convert to a 1-D float64 array with finite entries."""
    v = np.ascontiguousarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"expected a vector of length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


class Pseudoinverse:
    """Reusable applicator of the least-squares pseudoinverse of a tall matrix.

    Backed by a reduced QR factorization computed once at construction; the
    normal-equations matrix is never formed or inverted explicitly. Immutable
    after construction.
    """

    def __init__(self, X):
        X = as_matrix(X)
        n, p = X.shape
        if n < p:
            raise ValueError(f"pseudoinverse requires rows >= cols, got {n} x {p}")
        q, r = np.linalg.qr(X, mode="reduced")
        diag = np.abs(np.diag(r))
        if diag.min() < n * np.finfo(float).eps * diag.max():
            raise RankDeficientError(
                f"matrix of shape {n} x {p} is numerically rank deficient"
            )
        self._q = q
        self._r = r
        self.shape = (n, p)

    def apply(self, v):
        """Least-squares coefficients b minimizing ||v - X b||_2."""
        v = as_vector(v, length=self.shape[0])
        return solve_triangular(self._r, self._q.T @ v, lower=False)


def factorize(X):
    """Factor X once for repeated pseudoinverse application."""
    return Pseudoinverse(X)


def apply_pinv(pinv, v):
    """Apply a factored pseudoinverse to a vector of length rows(X)."""
    return pinv.apply(v)


def weighted_inner(a, b, w):
    """Weighted inner product sum_i a_i * b_i * w_i (w nonnegative)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(w, dtype=float)
    if a.shape != b.shape or a.shape != w.shape:
        raise ValueError(f"shape mismatch: {a.shape}, {b.shape}, {w.shape}")
    return float(np.sum(a * b * w))


def weighted_norm_sq(a, w):
    """Weighted squared norm sum_i a_i^2 * w_i."""
    return weighted_inner(a, a, w)
