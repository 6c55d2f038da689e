"""Dense linear-algebra layer.

Provides the symmetric eigensolver (cyclic Jacobi), the snapshot SVD,
basis truncation, and the two linear solvers used throughout: forward
backward Gauss-Seidel and Gaussian elimination with partial pivoting.
Everything here operates on plain float64 numpy arrays.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import NumericsError

JACOBI_MAX_SWEEPS = 100
RANK_TOL = 1e-12


@dataclass(frozen=True)
class SvdResult:
    """Singular values (non-increasing) and orthonormal left vectors."""

    singular_values: np.ndarray  # (M',)
    left_vectors: np.ndarray  # (N, M'), orthonormal columns


class GaussSeidelResult(NamedTuple):
    x: np.ndarray
    converged: bool
    sweeps: int


def _as_square(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    return m


def symmetric_eig(m, tol=1e-12):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in descending
    order and eigenvectors as orthonormal columns.  The input must be
    symmetric within ``tol * ||m||_F``.
    """
    m = _as_square(m)
    norm = float(np.linalg.norm(m))
    if np.abs(m - m.T).max(initial=0.0) > tol * max(norm, 1e-300):
        raise ValueError("matrix is not symmetric within tolerance")
    a = np.array(m, dtype=np.float64, order="C")
    n = a.shape[0]
    v = np.eye(n, order="C")
    threshold = tol * norm
    for _ in range(JACOBI_MAX_SWEEPS):
        off = _max_offdiag(a)
        if off <= threshold:
            break
        kernels.jacobi_sweep(a, v, threshold)
    else:
        raise NumericsError(
            f"Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
        )
    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


def _max_offdiag(a):
    if a.shape[0] < 2:
        return 0.0
    off = np.abs(a - np.diag(np.diag(a)))
    return float(off.max())


def method_of_snapshots(s, rank_tol=RANK_TOL):
    """Left singular vectors and singular values via the snapshot Gram matrix.

    Eigendecomposes the M-by-M matrix ``S^T S`` and maps its eigenvectors to
    left vectors, discarding directions whose eigenvalue falls below
    ``rank_tol`` times the largest.  Columns are sign-fixed so that the
    largest-magnitude entry of each is positive.
    """
    s = np.asarray(s, dtype=np.float64)
    if s.ndim != 2:
        raise ValueError(f"expected a 2D snapshot matrix, got ndim={s.ndim}")
    if not np.any(s):
        raise ValueError("snapshot matrix is identically zero")
    gram = s.T @ s
    mu, phi = symmetric_eig(gram)
    keep = mu > rank_tol * mu[0]
    mu = mu[keep]
    phi = phi[:, keep]
    sigma = np.sqrt(mu)
    left = (s @ phi) / sigma
    _fix_signs(left)
    return SvdResult(singular_values=sigma, left_vectors=left)


def _fix_signs(columns):
    for k in range(columns.shape[1]):
        col = columns[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            col *= -1.0


def truncate_basis(svd, fraction=None, count=None):
    """First-P left vectors, with P from an explicit count or the smallest P
    whose squared singular values capture at least ``fraction`` of the total.
    """
    if (fraction is None) == (count is None):
        raise ValueError("specify exactly one of fraction or count")
    sigma = svd.singular_values
    if count is not None:
        p = int(count)
        if not 1 <= p <= sigma.shape[0]:
            raise ValueError(f"count must be in [1, {sigma.shape[0]}], got {count}")
    else:
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"fraction must be in (0, 1], got {fraction}")
        if fraction >= 1.0:
            p = int(np.count_nonzero(sigma > 0.0))
        else:
            energy = np.cumsum(sigma**2) / np.sum(sigma**2)
            p = int(np.searchsorted(energy, fraction) + 1)
    return np.ascontiguousarray(svd.left_vectors[:, :p])


def capture_fraction(singular_values, count):
    """Fraction of squared singular-value mass carried by the first ``count``."""
    sigma = np.asarray(singular_values, dtype=np.float64)
    total = float(np.sum(sigma**2))
    return float(np.sum(sigma[:count] ** 2) / total)


def gauss_seidel(a, rhs, x0=None, tol=1e-10, max_sweeps=10000):
    """Forward backward Gauss-Seidel for a dense system.

    Sweeps until ``||A x - rhs||_inf <= tol * ||rhs||_inf`` or the sweep cap;
    the result carries a ``converged`` flag rather than raising on the cap.
    """
    a = _as_square(a)
    rhs = np.asarray(rhs, dtype=np.float64)
    if rhs.shape != (a.shape[0],):
        raise ValueError(f"rhs shape {rhs.shape} does not match matrix {a.shape}")
    diag = np.diag(a)
    if np.any(diag == 0.0):
        raise ValueError("Gauss-Seidel requires nonzero diagonal entries")
    x = np.zeros_like(rhs) if x0 is None else np.array(x0, dtype=np.float64)
    a = np.ascontiguousarray(a)
    threshold = tol * float(np.abs(rhs).max(initial=0.0))
    sweeps = 0
    converged = False
    while sweeps < max_sweeps:
        kernels.gs_dense_sweep(a, rhs, x)
        sweeps += 1
        if float(np.abs(a @ x - rhs).max(initial=0.0)) <= threshold:
            converged = True
            break
    return GaussSeidelResult(x=x, converged=converged, sweeps=sweeps)


def gaussian_elimination(a, rhs):
    """Direct dense solve by LU with partial pivoting."""
    a = np.array(_as_square(a), order="C")
    rhs = np.asarray(rhs, dtype=np.float64)
    n = a.shape[0]
    if rhs.shape != (n,):
        raise ValueError(f"rhs shape {rhs.shape} does not match matrix {a.shape}")
    b = rhs.copy()
    pivot_floor = n * np.finfo(np.float64).eps * max(float(np.abs(a).max(initial=0.0)), 1e-300)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if np.abs(a[p, k]) <= pivot_floor:
            raise NumericsError(f"matrix is singular to working precision (column {k})")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
        mult = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k + 1 :] -= np.outer(mult, a[k, k + 1 :])
        b[k + 1 :] -= mult * b[k]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - a[i, i + 1 :] @ x[i + 1 :]) / a[i, i]
    return x
