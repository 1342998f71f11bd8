"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: KERNEL CORE
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

Kernel evaluation and gram / cross-kernel matrices for the RKHS the
CSD-SVM decision function lives in.

KERNELS:
  linear   k(x, y) = <x, y>
  rbf      k(x, y) = exp(-||x - y||^2 / (2 sigma^2))      values in (0, 1]

The RBF exponent is negative. A positive exponent is unbounded and not a
positive-definite kernel, so it is never offered.

SHAPES:
  A "list of vectors" is anything np.asarray turns into an (n, d) array.
  A flat 1-D array is read as n points of dimension 1.

USAGE:
    from kernel_core import KernelSpec, gram_matrix, cross_kernel

    spec = KernelSpec.rbf(0.5)
    K = gram_matrix(spec, Z)            # (n, n), exactly symmetric
    Kq = cross_kernel(spec, Z, Zq)      # (m, n)
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from csd_errors import DataError

# ============================================================
# KERNEL KINDS
# ============================================================
KIND_LINEAR = 'linear'
KIND_RBF = 'rbf'
KERNEL_KINDS = (KIND_LINEAR, KIND_RBF)


@dataclass(frozen=True)
class KernelSpec:
    """Immutable kernel description. `sigma` is required iff kind is rbf."""

    kind: str
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise DataError(f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}")
        if self.kind == KIND_RBF:
            if self.sigma is None or not np.isfinite(self.sigma) or self.sigma <= 0:
                raise DataError(f"rbf kernel needs a positive finite sigma, got {self.sigma!r}")
            object.__setattr__(self, 'sigma', float(self.sigma))
        elif self.sigma is not None:
            raise DataError("linear kernel takes no sigma")

    @classmethod
    def linear(cls):
        return cls(KIND_LINEAR)

    @classmethod
    def rbf(cls, sigma):
        return cls(KIND_RBF, sigma)

    def to_dict(self):
        return {'kind': self.kind, 'sigma': self.sigma}

    @classmethod
    def from_dict(cls, payload):
        return cls(payload['kind'], payload.get('sigma'))

    def label(self):
        if self.kind == KIND_RBF:
            return f"rbf(sigma={self.sigma:g})"
        return 'linear'


# ============================================================
# SHAPE HELPERS
# ============================================================
def as_points(points, dim=None, name='points'):
    """Coerce a list of vectors into a float (n, d) array."""
    arr = np.asarray(points, dtype=float)
    if arr.size == 0:
        if dim is None:
            if arr.ndim == 2:
                return arr.reshape(0, arr.shape[1])
            raise DataError(f"{name} is empty and no dimension is known")
        return np.empty((0, dim), dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DataError(f"{name} must be a list of vectors, got array of shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise DataError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    return arr


def _as_vector(x, name):
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size == 0:
        raise DataError(f"{name} must have dimension >= 1")
    return arr


# ============================================================
# KERNEL EVALUATION
# ============================================================
def kernel_eval(spec, x, y):
    """k(x, y) for a single pair of equal-dimension vectors."""
    x = _as_vector(x, 'x')
    y = _as_vector(y, 'y')
    if x.shape != y.shape:
        raise DataError(f"dimension mismatch: {x.size} vs {y.size}")
    if spec.kind == KIND_LINEAR:
        return float(np.dot(x, y))
    diff = x - y
    return float(np.exp(-np.dot(diff, diff) / (2.0 * spec.sigma ** 2)))


def _rbf_from_sqdist(sqdist, sigma):
    return np.exp(-sqdist / (2.0 * sigma ** 2))


def gram_matrix(spec, points):
    """
    K_ij = k(points[i], points[j]).

    Each unordered pair is computed once and mirrored, so the result is
    bitwise symmetric. The RBF diagonal is exactly 1.
    """
    P = as_points(points)
    n = P.shape[0]
    if n < 1:
        raise DataError("gram_matrix needs at least one point")

    if spec.kind == KIND_LINEAR:
        upper = np.triu(P @ P.T)
        return upper + np.triu(upper, 1).T

    # pdist returns the condensed upper triangle; squareform mirrors it
    K = _rbf_from_sqdist(squareform(pdist(P, 'sqeuclidean')), spec.sigma)
    np.fill_diagonal(K, 1.0)
    return K


def cross_kernel(spec, train, query):
    """K_q[i, j] = k(query[i], train[j]); an empty query gives a (0, n) matrix."""
    T = as_points(train, name='train')
    Q = as_points(query, dim=T.shape[1], name='query')
    if Q.shape[0] == 0:
        return np.empty((0, T.shape[0]), dtype=float)

    if spec.kind == KIND_LINEAR:
        return Q @ T.T
    return _rbf_from_sqdist(cdist(Q, T, 'sqeuclidean'), spec.sigma)
