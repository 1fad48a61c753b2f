"""Small linear-algebra helpers used throughout the package.

Skew-symmetric matrices are flattened to coordinate vectors relative to the
Frobenius-orthonormal basis returned by :func:`skew_basis`, so that Euclidean
norms of coordinate vectors agree with Frobenius norms of the matrices.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)


def skew_dim(m: int) -> int:
    return m * (m - 1) // 2


def skew_pairs(m: int) -> list[tuple[int, int]]:
    """Index pairs (a, b), a < b, in the fixed enumeration order."""
    return [(a, b) for a in range(m) for b in range(a + 1, m)]


def skew_basis(m: int) -> np.ndarray:
    """Frobenius-orthonormal basis of so(m), shape (m(m-1)/2, m, m)."""
    basis = np.zeros((skew_dim(m), m, m))
    for idx, (a, b) in enumerate(skew_pairs(m)):
        basis[idx, a, b] = 1.0 / _SQRT2
        basis[idx, b, a] = -1.0 / _SQRT2
    return basis


def skew_to_coords(mats: np.ndarray) -> np.ndarray:
    """Coordinates of one (m,m) or a stack (k,m,m) of skew matrices.

    Stacks are flattened component-major, matching the layout used by the
    deformation module's constraint matrices.
    """
    mats = np.asarray(mats)
    single = mats.ndim == 2
    if single:
        mats = mats[None]
    m = mats.shape[-1]
    pairs = skew_pairs(m)
    rows = np.array([mats[:, a, b] for (a, b) in pairs]).T * _SQRT2
    out = rows.reshape(-1)
    return out if not single else out


def coords_to_skew(coords: np.ndarray, m: int, k: int = 1) -> np.ndarray:
    """Inverse of :func:`skew_to_coords`; returns shape (k, m, m)."""
    d = skew_dim(m)
    coords = np.asarray(coords, dtype=float).reshape(k, d)
    out = np.zeros((k, m, m))
    for idx, (a, b) in enumerate(skew_pairs(m)):
        out[:, a, b] = coords[:, idx] / _SQRT2
        out[:, b, a] = -coords[:, idx] / _SQRT2
    return out


def polar_orthogonal(mat: np.ndarray) -> np.ndarray:
    """Orthogonal polar factor of a square matrix via SVD."""
    u, _, vt = np.linalg.svd(mat)
    return u @ vt


def random_orthogonal(rng: np.random.Generator, n: int, det_sign: int | None = None) -> np.ndarray:
    """Haar-ish orthogonal matrix; ``det_sign`` (+1/-1) forces a component."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    if det_sign is not None and np.sign(np.linalg.det(q)) != det_sign:
        q[:, 0] = -q[:, 0]
    return q


def orthonormal_range(cols: np.ndarray, rel_tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis of the column span; columns are the basis."""
    if cols.size == 0:
        return cols.reshape(cols.shape[0], 0)
    u, s, _ = np.linalg.svd(cols, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return cols[:, :0]
    rank = int(np.sum(s > rel_tol * s[0]))
    return u[:, :rank]


def principal_cosines(basis_a: np.ndarray, basis_b: np.ndarray) -> np.ndarray:
    """Cosines of principal angles between two orthonormal column spans."""
    if basis_a.shape[1] == 0 or basis_b.shape[1] == 0:
        return np.zeros(0)
    return np.linalg.svd(basis_a.T @ basis_b, compute_uv=False)


def intersection_dim(basis_a: np.ndarray, basis_b: np.ndarray, cos_tol: float = 1e-8) -> int:
    """Dimension of the intersection of two orthonormal column spans."""
    return int(np.sum(principal_cosines(basis_a, basis_b) > 1.0 - cos_tol))
