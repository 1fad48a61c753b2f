"""Torus-invariant metrics on R^{m+2k} and their distinguished submanifolds.

Points are written (x, u) in R^m x R^{2k}; the torus T^k acts by rotating
the k two-dimensional blocks of u.  Torus elements are coordinatized by
z-bar in [0,1)^k (one unit = one full turn, rotation angle 2 pi z-bar_i),
while Lie-algebra vectors Z carry radian units, so the fundamental field of
Z has i-th block Z_i * JB.

Given a j-map, the metric at (x, u) is the block matrix

    G = [[I_m + A^T A, -A^T], [-A, I_{2k}]],
    A(x, u) y = (1/2) * rho_*(B(x, y)) u,   B(x, y)_i = <J_i x, y>,

the unique metric for which projection to R^m is a Riemannian submersion
with Euclidean fibers and the prescribed horizontal spaces.  Its
determinant is identically one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ChartDomainError
from .jmaps import JMap

JB = np.array([[0.0, -1.0], [1.0, 0.0]])
TWO_PI = 2.0 * np.pi


def rho_star(z: np.ndarray, k: int | None = None) -> np.ndarray:
    """Matrix of the infinitesimal torus action, block-diag(Z_i * JB)."""
    z = np.asarray(z, dtype=float)
    k = len(z) if k is None else k
    out = np.zeros((2 * k, 2 * k))
    for i in range(k):
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = z[i] * JB
    return out


def fundamental_field(z: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Value at u of the fundamental vector field of Z (radian units)."""
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    blocks = u.reshape(*u.shape[:-1], -1, 2)
    rotated = blocks @ JB.T  # (JB u_i) per block
    return (z[..., :, None] * rotated).reshape(u.shape)


def torus_rotation(zbar: np.ndarray) -> np.ndarray:
    """Block rotation matrix for the torus element z-bar (angles 2 pi z-bar_i)."""
    zbar = np.asarray(zbar, dtype=float)
    k = len(zbar)
    out = np.zeros((2 * k, 2 * k))
    for i, t in enumerate(TWO_PI * zbar):
        c, s = np.cos(t), np.sin(t)
        out[2 * i : 2 * i + 2, 2 * i : 2 * i + 2] = [[c, -s], [s, c]]
    return out


def torus_action(zbar: np.ndarray, point: np.ndarray, m: int) -> np.ndarray:
    """Apply the torus element to a point (x, u); x is untouched."""
    point = np.asarray(point, dtype=float)
    out = point.copy()
    out[..., m:] = point[..., m:] @ torus_rotation(zbar).T
    return out


def orbit_angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Torus element (in turns) rotating u onto v, blockwise; radii must match."""
    u = np.asarray(u, dtype=float).reshape(-1, 2)
    v = np.asarray(v, dtype=float).reshape(-1, 2)
    ang_u = np.arctan2(u[:, 1], u[:, 0])
    ang_v = np.arctan2(v[:, 1], v[:, 0])
    return ((ang_v - ang_u) / TWO_PI) % 1.0


@dataclass(frozen=True)
class BilinearMapB:
    """The alternating bilinear map with <B(x, y), z> = <j(z) x, y>.

    Component i is the matrix of (x, y) -> <J_i x, y>, i.e. J_i itself read
    as a bilinear form.
    """

    j: JMap

    @property
    def mats(self) -> np.ndarray:
        return self.j.mats

    def __call__(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        # <B(x,y), e_i> = <J_i x, y>
        return np.einsum("imn,...n,...m->...i", self.j.mats, np.asarray(x, float), np.asarray(y, float))


def bmap_from_j(j: JMap) -> BilinearMapB:
    return BilinearMapB(j)


class AmbientMetric:
    """The metric field of one j-map, evaluated pointwise or in batches."""

    def __init__(self, j: JMap):
        self.j = j
        self.m = j.m
        self.k = j.k
        self.dim = j.m + 2 * j.k

    def _split(self, points: np.ndarray):
        points = np.asarray(points, dtype=float)
        return points[..., : self.m], points[..., self.m :]

    def a_matrix(self, points: np.ndarray) -> np.ndarray:
        """The 2k x m block A(x, u) with rows (1/2) (JB u_i) (J_i x)^T."""
        x, u = self._split(points)
        w = u.reshape(*u.shape[:-1], self.k, 2) @ JB.T  # JB u_i
        v = np.einsum("imn,...n->...im", self.j.mats, x)  # J_i x
        a = 0.5 * w[..., :, :, None] * v[..., :, None, :]
        return a.reshape(*points.shape[:-1], 2 * self.k, self.m)

    def matrix(self, points: np.ndarray) -> np.ndarray:
        """Metric matrices, shape (..., m+2k, m+2k); symmetric positive definite."""
        points = np.asarray(points, dtype=float)
        a = self.a_matrix(points)
        n = self.dim
        out = np.zeros(points.shape[:-1] + (n, n))
        at_a = np.einsum("...em,...en->...mn", a, a)
        out[..., : self.m, : self.m] = np.eye(self.m) + at_a
        out[..., : self.m, self.m :] = -np.swapaxes(a, -1, -2)
        out[..., self.m :, : self.m] = -a
        out[..., self.m :, self.m :] = np.eye(2 * self.k)
        return out

    def pullback_under_torus(self, zbar: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Pullback matrices of the metric under the torus element z-bar."""
        rot = torus_rotation(zbar)
        n = self.dim
        dphi = np.zeros((n, n))
        dphi[: self.m, : self.m] = np.eye(self.m)
        dphi[self.m :, self.m :] = rot
        moved = torus_action(zbar, np.atleast_2d(points), self.m)
        g = self.matrix(moved)
        out = np.einsum("ab,...bc,cd->...ad", dphi.T, g, dphi)
        return out if np.asarray(points).ndim > 1 else out[0]

    def det_deviation(self, points: np.ndarray) -> float:
        """max |det G - 1| over the given points."""
        return float(np.max(np.abs(np.linalg.det(self.matrix(points)) - 1.0)))


@dataclass(frozen=True)
class SphereChart:
    """Axis graph chart of the unit sphere: coordinate `axis` is solved for.

    The chart point p collects the remaining coordinates; the domain is
    |p|^2 <= 1 - margin^2 so the graph stays away from the equator.
    """

    axis: int
    sign: int
    dim: int  # ambient dimension m + 2k
    margin: float = 0.05

    def contains(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return np.sum(p * p, axis=-1) <= 1.0 - self.margin**2

    def require(self, p: np.ndarray):
        if not np.all(self.contains(p)):
            raise ChartDomainError(f"point outside chart domain (axis={self.axis}, sign={self.sign})")

    def embed(self, p: np.ndarray) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        self.require(p)
        rest = np.sqrt(np.clip(1.0 - np.sum(p * p, axis=-1), 0.0, None))
        out = np.empty(p.shape[:-1] + (self.dim,))
        idx = [i for i in range(self.dim) if i != self.axis]
        out[..., idx] = p
        out[..., self.axis] = self.sign * rest
        return out

    def project(self, q: np.ndarray) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        idx = [i for i in range(self.dim) if i != self.axis]
        return q[..., idx]

    def jacobian(self, p: np.ndarray) -> np.ndarray:
        """d(embed)/dp, shape (..., dim, dim-1)."""
        p = np.asarray(p, dtype=float)
        q = np.sqrt(1.0 - np.sum(p * p, axis=-1))
        out = np.zeros(p.shape[:-1] + (self.dim, self.dim - 1))
        idx = [i for i in range(self.dim) if i != self.axis]
        eye = np.eye(self.dim - 1)
        out[..., idx, :] = eye
        out[..., self.axis, :] = -self.sign * p / q[..., None]
        return out

    def hessian(self, p: np.ndarray) -> np.ndarray:
        """Second derivatives of the embedding, shape (..., dim, dim-1, dim-1)."""
        p = np.asarray(p, dtype=float)
        q = np.sqrt(1.0 - np.sum(p * p, axis=-1))[..., None, None]
        eye = np.eye(self.dim - 1)
        out = np.zeros(p.shape[:-1] + (self.dim, self.dim - 1, self.dim - 1))
        out[..., self.axis, :, :] = -self.sign * (
            eye / q + p[..., :, None] * p[..., None, :] / q**3
        )
        return out

    def third(self, p: np.ndarray) -> np.ndarray:
        """Third derivatives of the embedding, shape (..., dim, d-1, d-1, d-1)."""
        p = np.asarray(p, dtype=float)
        d = self.dim - 1
        q = np.sqrt(1.0 - np.sum(p * p, axis=-1))[..., None, None, None]
        eye = np.eye(d)
        sym = (
            eye[..., :, :, None] * p[..., None, None, :]
            + eye[..., :, None, :] * p[..., None, :, None]
            + eye[..., None, :, :] * p[..., :, None, None]
        )
        cubic = p[..., :, None, None] * p[..., None, :, None] * p[..., None, None, :]
        out = np.zeros(p.shape[:-1] + (self.dim, d, d, d))
        out[..., self.axis, :, :, :] = -self.sign * (sym / q**3 + 3.0 * cubic / q**5)
        return out


def all_charts(dim: int, margin: float = 0.05) -> list[SphereChart]:
    return [SphereChart(axis=a, sign=s, dim=dim, margin=margin) for a in range(dim) for s in (1, -1)]


def chart_for_point(q: np.ndarray, margin: float = 0.05) -> tuple[SphereChart, np.ndarray]:
    """Chart whose axis is the largest-magnitude coordinate of q."""
    q = np.asarray(q, dtype=float)
    axis = int(np.argmax(np.abs(q)))
    sign = 1 if q[axis] >= 0 else -1
    chart = SphereChart(axis=axis, sign=sign, dim=len(q), margin=margin)
    return chart, chart.project(q)


def sphere_metric_at(metric: AmbientMetric, chart: SphereChart, p: np.ndarray) -> np.ndarray:
    """Pullback of the ambient metric to a sphere chart via the exact jacobian."""
    q = chart.embed(p)
    jac = chart.jacobian(p)
    g = metric.matrix(q)
    return np.einsum("...aA,...ab,...bB->...AB", jac, g, jac)


@dataclass(frozen=True)
class LeafSpec:
    """A torus-saturated leaf: block radii a_i > 0 (and |a| < 1 on the sphere)."""

    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if any(r <= 0 for r in radii):
            raise ValueError("leaf radii must be positive")
        object.__setattr__(self, "radii", radii)

    @property
    def k(self) -> int:
        return len(self.radii)

    @property
    def norm(self) -> float:
        return float(np.sqrt(sum(r * r for r in self.radii)))

    def base_radius(self) -> float:
        if self.norm >= 1.0:
            raise ValueError("leaf does not meet the unit sphere")
        return float(np.sqrt(1.0 - self.norm**2))

    def base_point(self) -> np.ndarray:
        """u with u_i = (a_i, 0)."""
        u = np.zeros(2 * self.k)
        u[0::2] = self.radii
        return u


def omega_matrix(j: JMap, x: np.ndarray) -> np.ndarray:
    """The k x m matrix Omega(x) with rows (1/2)(J_i x)^T."""
    return 0.5 * np.einsum("imn,...n->...im", j.mats, np.asarray(x, dtype=float))


def leaf_metric_at(j: JMap, leaf: LeafSpec, x: np.ndarray, zbar: np.ndarray | None = None) -> np.ndarray:
    """Left-invariant leaf metric in group coordinates (x, z-bar).

    Coordinates on the group R^m x T^k use torus turns, so the fiber block
    carries the factor (2 pi)^2:

        [[I + Omega^T H Omega, -2 pi Omega^T H], [-2 pi H Omega, 4 pi^2 H]]

    with H = diag(a_i^2).  The value does not depend on z-bar.  Pulling the
    ambient metric back through (x, z-bar) -> (x, z-bar . u0) with block
    radii a reproduces this matrix exactly.
    """
    if leaf.k != j.k:
        raise ValueError("leaf rank does not match the j-map")
    x = np.asarray(x, dtype=float)
    omega = omega_matrix(j, x)
    h = np.diag(np.square(leaf.radii))
    m = j.m
    out = np.zeros(x.shape[:-1] + (m + j.k, m + j.k))
    oth = np.einsum("...im,ij->...mj", omega, h)
    out[..., :m, :m] = np.eye(m) + np.einsum("...mj,...jn->...mn", oth, omega)
    out[..., :m, m:] = -TWO_PI * oth
    out[..., m:, :m] = -TWO_PI * np.swapaxes(oth, -1, -2)
    out[..., m:, m:] = (TWO_PI**2) * h
    return out


def leaf_embedding(leaf: LeafSpec, x: np.ndarray, zbar: np.ndarray) -> np.ndarray:
    """The point (x, z-bar . u0) of the ambient space, u0 the leaf base point."""
    u = torus_rotation(zbar) @ leaf.base_point()
    return np.concatenate([np.asarray(x, dtype=float), u])


def leaf_embedding_pullback(j: JMap, leaf: LeafSpec, x: np.ndarray, zbar: np.ndarray) -> np.ndarray:
    """Ambient metric pulled back through the leaf embedding at (x, z-bar)."""
    metric = AmbientMetric(j)
    point = leaf_embedding(leaf, x, zbar)
    u = point[j.m :]
    g = metric.matrix(point)
    n = j.m + 2 * j.k
    dphi = np.zeros((n, j.m + j.k))
    dphi[: j.m, : j.m] = np.eye(j.m)
    for i in range(j.k):
        dphi[j.m + 2 * i : j.m + 2 * i + 2, j.m + i] = TWO_PI * (JB @ u[2 * i : 2 * i + 2])
    return dphi.T @ g @ dphi


def bundle_isometry_check(j: JMap, samples: int = 200, seed: int = 0) -> float:
    """Numeric check of the associated-bundle description of the metric.

    The left-invariant horizontal frame and the Euclidean fiber frame are
    pushed through the bundle map (x, z-bar, u) -> (x, z-bar . u); their
    Gram matrix under the ambient metric must be the identity.  Returns the
    max absolute deviation over the sampled points.
    """
    rng = np.random.default_rng(seed)
    metric = AmbientMetric(j)
    m, k = j.m, j.k
    n = m + 2 * k
    worst = 0.0
    for _ in range(samples):
        x = rng.standard_normal(m)
        zbar = rng.random(k)
        u = rng.standard_normal(2 * k)
        u_moved = torus_rotation(zbar) @ u
        point = np.concatenate([x, u_moved])
        g = metric.matrix(point)
        frame = np.zeros((n, n))
        bmap = bmap_from_j(j)
        for l in range(m):
            y = np.zeros(m)
            y[l] = 1.0
            frame[:m, l] = y
            frame[m:, l] = 0.5 * fundamental_field(bmap(x, y), u_moved)
        rot = torus_rotation(zbar)
        for a in range(2 * k):
            frame[m:, m + a] = rot[:, a]
        gram = frame.T @ g @ frame
        worst = max(worst, float(np.max(np.abs(gram - np.eye(n)))))
    return worst
