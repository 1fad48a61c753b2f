"""Curvature of the ambient, sphere, and leaf metrics from exact derivatives.

The ambient metric is polynomial in the coordinates, so its first and
second derivatives are assembled in closed form from the block structure;
sphere charts compose those with exact chart derivatives up to third
order.  Riemann needs second metric derivatives, and a purely
finite-difference pipeline loses too many digits for the tolerances used
downstream, so finite differences appear only as a cross-check oracle in
the tests.

Index conventions (batched over a leading point axis p):

    d1[p, a, b, c]    = d_a g_{bc}
    d2[p, a, b, c, d] = d_a d_b g_{cd}
    christoffels[p, c, a, b] = Gamma^c_{ab}
    riemann[p, a, b, c, d]   = R_{abcd} = <R(e_c, e_d) e_b, e_a>

and sectional curvature of span(X, Y) is R(X, Y, X, Y) normalized by the
Gram determinant, equal to +1 on the round unit sphere.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegeneratePlaneError, DegenerateOrbitError, IsodeformError
from .geometry import JB, AmbientMetric, SphereChart, chart_for_point, leaf_metric_at, \
    LeafSpec, omega_matrix, rho_star, TWO_PI
from .jmaps import JMap
from .sampling import ball_points, sphere_points


class NearSingularMetricError(IsodeformError):
    """Metric condition number too large for trustworthy curvature."""


class AmbientField:
    """Closed-form value/d1/d2 of the ambient metric of one j-map."""

    def __init__(self, j: JMap):
        self.j = j
        self.metric = AmbientMetric(j)
        self.m = j.m
        self.k = j.k
        self.dim = j.m + 2 * j.k
        self._d2a = self._constant_d2a()

    def _constant_d2a(self) -> np.ndarray:
        """d^2 A[e, d] / d xi_a d xi_b; only x-u cross terms survive."""
        m, k, n = self.m, self.k, self.dim
        d2a = np.zeros((2 * k, m, n, n))
        for i in range(k):
            for s in range(2):
                for t in range(2):
                    for c in range(m):
                        # e = 2i+s, u-coordinate f = m + 2i + t
                        d2a[2 * i + s, :, c, m + 2 * i + t] += 0.5 * JB[s, t] * self.j.mats[i, :, c]
        d2a = d2a + np.swapaxes(d2a, 2, 3)
        return d2a

    def _a_parts(self, points: np.ndarray):
        points = np.asarray(points, dtype=float)
        x = points[:, : self.m]
        u = points[:, self.m :]
        w = u.reshape(len(points), self.k, 2) @ JB.T          # JB u_i
        v = np.einsum("imn,pn->pim", self.j.mats, x)           # J_i x
        amat = (0.5 * w[:, :, :, None] * v[:, :, None, :]).reshape(len(points), 2 * self.k, self.m)
        return amat, w, v

    def a_and_da(self, points: np.ndarray):
        points = np.asarray(points, dtype=float)
        npts = len(points)
        m, k, n = self.m, self.k, self.dim
        amat, w, v = self._a_parts(points)
        da = np.zeros((npts, 2 * k, m, n))
        # x-derivatives: dA[e=2i+s, d, c] = (1/2) w[i, s] J[i, d, c]
        dx = 0.5 * np.einsum("pis,idc->pisdc", w, self.j.mats)
        da[:, :, :, :m] = dx.reshape(npts, 2 * k, m, m)
        # u-derivatives (within the same block): dA[2i+s, d, m+2i+t] = (1/2) JB[s,t] v[i, d]
        du = 0.5 * np.einsum("st,pid->pisdt", JB, v)
        for i in range(k):
            da[:, 2 * i : 2 * i + 2, :, m + 2 * i : m + 2 * i + 2] = du[:, i]
        return amat, da

    def value(self, points: np.ndarray) -> np.ndarray:
        return self.metric.matrix(points)

    def d1(self, points: np.ndarray) -> np.ndarray:
        npts = len(points)
        m, n = self.m, self.dim
        amat, da = self.a_and_da(points)
        out = np.zeros((npts, n, n, n))
        dtl = np.einsum("peca,ped->pacd", da, amat) + np.einsum("pec,peda->pacd", amat, da)
        out[:, :, :m, :m] = dtl
        dtr = -np.einsum("peca->pace", da)
        out[:, :, :m, m:] = dtr
        out[:, :, m:, :m] = np.swapaxes(dtr, 2, 3)
        return out

    def d2(self, points: np.ndarray) -> np.ndarray:
        npts = len(points)
        m, n = self.m, self.dim
        amat, da = self.a_and_da(points)
        d2a = self._d2a
        out = np.zeros((npts, n, n, n, n))
        # cross terms sum_e dA[e,c,a] dA[e,d,b] via one batched Gram product
        y = da.transpose(0, 2, 3, 1).reshape(npts, m * n, 2 * self.k)  # [(c, a), e]
        t5 = (y @ np.swapaxes(y, 1, 2)).reshape(npts, m, n, m, n)
        d2tl = np.einsum("pcadb->pabcd", t5) + np.einsum("pcbda->pabcd", t5)
        # constant-curvature pieces A d2A (both orders) from a single tensordot
        tc = np.tensordot(amat, d2a, axes=([1], [0]))  # [p, col(A), col(d2A), a, b]
        d2tl += np.einsum("pdcab->pabcd", tc)
        d2tl += np.einsum("pcdab->pabcd", tc)
        out[:, :, :, :m, :m] = d2tl
        d2tr = -np.einsum("ecab->abce", d2a)
        out[:, :, :, :m, m:] = d2tr[None]
        out[:, :, :, m:, :m] = np.swapaxes(d2tr, 2, 3)[None]
        return out


class SphereChartField:
    """Pullback of an ambient field to a sphere graph chart.

    Riemann needs two metric derivatives, which through the chart requires
    third derivatives of the embedding; those are exact, so no accuracy is
    lost to differencing.  Only the solved-for coordinate of the embedding
    is nonlinear, so every contraction against a chart hessian or third
    derivative is rank one in the ambient index; the pullback exploits
    that instead of forming dense jacobian products.
    """

    def __init__(self, j: JMap, chart: SphereChart):
        self.ambient = AmbientField(j)
        self.chart = chart
        self.dim = chart.dim - 1
        self.rest = np.array([i for i in range(chart.dim) if i != chart.axis])

    def _pieces(self, points: np.ndarray):
        chart = self.chart
        points = np.atleast_2d(np.asarray(points, dtype=float))
        chart.require(points)
        q = chart.embed(points)
        sign = chart.sign
        qz = np.sqrt(1.0 - np.sum(points * points, axis=-1))  # (P,)
        w1 = -sign * points / qz[:, None]  # axis row of the jacobian
        d = self.dim
        eye = np.eye(d)
        w2 = -sign * (
            eye[None] / qz[:, None, None]
            + points[:, :, None] * points[:, None, :] / qz[:, None, None] ** 3
        )
        sym = (
            eye[None, :, :, None] * points[:, None, None, :]
            + eye[None, :, None, :] * points[:, None, :, None]
            + eye[None, None, :, :] * points[:, :, None, None]
        )
        cubic = points[:, :, None, None] * points[:, None, :, None] * points[:, None, None, :]
        w3 = -sign * (sym / qz[:, None, None, None] ** 3 + 3.0 * cubic / qz[:, None, None, None] ** 5)
        return q, w1, w2, w3

    def _pull(self, tensor: np.ndarray, w1: np.ndarray, slot: int) -> np.ndarray:
        """Contract one ambient slot with the jacobian: select + rank-one part."""
        sel = np.take(tensor, self.rest, axis=slot)
        ax = np.expand_dims(np.take(tensor, self.chart.axis, axis=slot), slot)
        shape = [1] * sel.ndim
        shape[0] = w1.shape[0]
        shape[slot] = w1.shape[1]
        sel += ax * w1.reshape(shape)
        return sel

    def value(self, points: np.ndarray) -> np.ndarray:
        q, w1, _, _ = self._pieces(points)
        g = self.ambient.value(q)
        return self._pull(self._pull(g, w1, 1), w1, 2)

    def d1(self, points: np.ndarray) -> np.ndarray:
        q, w1, w2, _ = self._pieces(points)
        ax = self.chart.axis
        g = self.ambient.value(q)
        gd = self.ambient.d1(q)
        out = self._pull(self._pull(self._pull(gd, w1, 1), w1, 2), w1, 3)
        g_b = self._pull(g, w1, 2)  # (p, a, B)
        g_a = self._pull(g, w1, 1)  # (p, A, b)
        out += np.einsum("pB,pAC->pCAB", g_b[:, ax], w2)
        out += np.einsum("pA,pBC->pCAB", g_a[:, :, ax], w2)
        return out

    def d2(self, points: np.ndarray) -> np.ndarray:
        q, w1, w2, w3 = self._pieces(points)
        ax = self.chart.axis
        g = self.ambient.value(q)
        gd = self.ambient.d1(q)
        gdd = self.ambient.d2(q)
        # all-first-order pullback of the ambient second derivative
        out = self._pull(self._pull(self._pull(self._pull(gdd, w1, 1), w1, 2), w1, 3), w1, 4)
        out = np.ascontiguousarray(np.einsum("pCDAB->pDCAB", out))
        # one chart hessian against the once-differentiated ambient metric
        gd_ab = self._pull(self._pull(gd, w1, 2), w1, 3)  # (p, c, A, B)
        out += np.einsum("pAB,pCD->pDCAB", gd_ab[:, ax], w2)
        gd_cb = self._pull(self._pull(gd, w1, 1), w1, 3)  # (p, C, a, B)
        out += np.einsum("pCB,pAD->pDCAB", gd_cb[:, :, ax], w2)
        gd_ca = self._pull(self._pull(gd, w1, 1), w1, 2)  # (p, C, A, b)
        out += np.einsum("pCA,pBD->pDCAB", gd_ca[:, :, :, ax], w2)
        # terms with the hessian on the (a or b) slot and jacobian on c:
        gd_b_full = self._pull(gd, w1, 3)  # (p, c, a, B)
        half = self._pull(gd_b_full, w1, 1)  # (p, D, a, B) with c pulled to D
        out += np.einsum("pDB,pAC->pDCAB", half[:, :, ax], w2)
        gd_a_full = self._pull(gd, w1, 2)  # (p, c, A, b)
        half2 = self._pull(gd_a_full, w1, 1)  # (p, D, A, b)
        out += np.einsum("pDA,pBC->pDCAB", half2[:, :, :, ax], w2)
        # chart third derivatives and hessian pairs against the metric
        g_b = self._pull(g, w1, 2)  # (p, a, B)
        out += np.einsum("pB,pACD->pDCAB", g_b[:, ax], w3)
        g_a = self._pull(g, w1, 1)  # (p, A, b)
        out += np.einsum("pA,pBCD->pDCAB", g_a[:, :, ax], w3)
        g_axax = g[:, ax, ax]  # scalar per point
        out += np.einsum("p,pAC,pBD->pDCAB", g_axax, w2, w2)
        out += np.einsum("p,pAD,pBC->pDCAB", g_axax, w2, w2)
        return out


class LeafField:
    """Closed-form derivatives of the leaf (group) metric in (x, z-bar)."""

    def __init__(self, j: JMap, leaf: LeafSpec):
        self.j = j
        self.leaf = leaf
        self.m = j.m
        self.k = j.k
        self.dim = j.m + j.k
        self.h = np.diag(np.square(leaf.radii))
        self.domega = 0.5 * self.j.mats  # dOmega[i, c, a] = (1/2) J[i, c, a]

    def value(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        return leaf_metric_at(self.j, self.leaf, points[:, : self.m])

    def d1(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        npts = len(points)
        m, n = self.m, self.dim
        omega = omega_matrix(self.j, points[:, :m])  # (p, k, m)
        out = np.zeros((npts, n, n, n))
        do = self.domega  # dOmega[i, c, a]
        dtl = np.einsum("ica,ij,pjd->pacd", do, self.h, omega, optimize=True)
        dtl = dtl + np.swapaxes(dtl, 2, 3)
        out[:, :m, :m, :m] = dtl
        dtr = -TWO_PI * np.einsum("ica,ij->acj", do, self.h)
        out[:, :m, :m, m:] = dtr[None]
        out[:, :m, m:, :m] = np.swapaxes(dtr, 1, 2)[None]
        return out

    def d2(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        npts = len(points)
        m, n = self.m, self.dim
        do = self.domega
        d2tl = np.einsum("ica,ij,jdb->abcd", do, self.h, do)
        d2tl = d2tl + np.einsum("abcd->bacd", d2tl)
        out = np.zeros((npts, n, n, n, n))
        out[:, :m, :m, :m, :m] = d2tl[None]
        return out


def curvature_arrays(field, points: np.ndarray, cond_limit: float = 1e12):
    """Batched metric, inverse, Christoffels, lowered Riemann, Ricci, scalar."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    g = field.value(points)
    cond = np.linalg.cond(g)
    if np.any(~np.isfinite(cond)) or np.max(cond) > cond_limit:
        raise NearSingularMetricError(f"metric condition number {np.max(cond):.3e}")
    npts, n = g.shape[0], g.shape[1]
    dg = field.d1(points)
    d2g = field.d2(points)
    ginv = np.linalg.inv(g)
    ginv_t = np.swapaxes(ginv, 1, 2)
    s = dg + np.einsum("pbad->pabd", dg) - np.einsum("pdab->pabd", dg)
    # Gamma^c_{ab} = (1/2) ginv[c, d] s[a, b, d]
    gam = 0.5 * (s.reshape(npts, -1, n) @ ginv_t).reshape(npts, n, n, n)
    gam = np.einsum("pabc->pcab", gam)
    dginv = -(ginv[:, None] @ dg @ ginv[:, None])
    ds = d2g + np.einsum("pebad->peabd", d2g) - np.einsum("pedab->peabd", d2g)
    # dGamma[e, c, a, b] = (1/2)(dginv[e, c, d] s[a, b, d] + ginv[c, d] ds[e, a, b, d])
    t1 = dginv.reshape(npts, n * n, n) @ np.swapaxes(s.reshape(npts, -1, n), 1, 2)
    t1 = t1.reshape(npts, n, n, n, n)
    t2 = (ds.reshape(npts, -1, n) @ ginv_t).reshape(npts, n, n, n, n)
    dgam = 0.5 * (t1 + np.einsum("peabc->pecab", t2))
    # R^a_{bcd} = d_c Gam^a_{db} - d_d Gam^a_{cb} + Gam^a_{ce} Gam^e_{db} - Gam^a_{de} Gam^e_{cb}
    prod = (gam.reshape(npts, n * n, n) @ gam.reshape(npts, n, n * n)).reshape(npts, n, n, n, n)
    riem_up = (
        np.einsum("pcadb->pabcd", dgam)
        - np.einsum("pdacb->pabcd", dgam)
        + np.einsum("pacdb->pabcd", prod)
        - np.einsum("padcb->pabcd", prod)
    )
    riem = (g @ riem_up.reshape(npts, n, -1)).reshape(npts, n, n, n, n)
    ricci = np.einsum("pabad->pbd", riem_up)
    scal = np.einsum("pbd,pbd->p", ginv, ricci)
    return g, ginv, gam, riem, ricci, scal


@dataclass(frozen=True)
class CurvaturePack:
    """All curvature data of one metric field at one point."""

    point: np.ndarray = field(repr=False)
    metric: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)
    christoffels: np.ndarray = field(repr=False)
    riemann: np.ndarray = field(repr=False)
    ricci: np.ndarray = field(repr=False)
    scalar: float = 0.0

    def symmetry_violation(self) -> float:
        """Worst Riemann symmetry / first-Bianchi violation, relative."""
        r = self.riemann
        scale = max(float(np.max(np.abs(r))), 1e-8)
        v1 = np.max(np.abs(r + np.einsum("bacd->abcd", r)))
        v2 = np.max(np.abs(r + np.einsum("abdc->abcd", r)))
        v3 = np.max(np.abs(r - np.einsum("cdab->abcd", r)))
        bianchi = np.max(np.abs(r + np.einsum("acdb->abcd", r) + np.einsum("adbc->abcd", r)))
        return float(max(v1, v2, v3, bianchi) / scale)


def curvature_at(field, point: np.ndarray) -> CurvaturePack:
    """Curvature pack of a metric field at a single point."""
    g, ginv, gam, riem, ricci, scal = curvature_arrays(field, np.atleast_2d(point))
    return CurvaturePack(
        point=np.asarray(point, dtype=float),
        metric=g[0],
        inverse=ginv[0],
        christoffels=gam[0],
        riemann=riem[0],
        ricci=ricci[0],
        scalar=float(scal[0]),
    )


def sectional(pack: CurvaturePack, x_vec: np.ndarray, y_vec: np.ndarray) -> float:
    """Sectional curvature of span(X, Y) from a curvature pack."""
    g = pack.metric
    x_vec = np.asarray(x_vec, dtype=float)
    y_vec = np.asarray(y_vec, dtype=float)
    gram = (x_vec @ g @ x_vec) * (y_vec @ g @ y_vec) - (x_vec @ g @ y_vec) ** 2
    if gram < 1e-12:
        raise DegeneratePlaneError(f"Gram determinant {gram:.3e} below threshold")
    num = np.einsum("abcd,a,b,c,d->", pack.riemann, x_vec, y_vec, x_vec, y_vec)
    return float(num / gram)


def sectional_batch(riem: np.ndarray, g: np.ndarray, planes_x: np.ndarray, planes_y: np.ndarray) -> np.ndarray:
    """Vectorized sectional curvatures; planes_* have shape (..., n)."""
    num = np.einsum("...abcd,...a,...b,...c,...d->...", riem, planes_x, planes_y, planes_x, planes_y)
    xx = np.einsum("...a,...ab,...b->...", planes_x, g, planes_x)
    yy = np.einsum("...a,...ab,...b->...", planes_y, g, planes_y)
    xy = np.einsum("...a,...ab,...b->...", planes_x, g, planes_y)
    return num / (xx * yy - xy * xy)


def fiber_second_fundamental_form(j: JMap, x: np.ndarray, u: np.ndarray) -> float:
    """Norm of the second fundamental form of the fiber {x} x R^{2k}.

    The fibers are totally geodesic, so this is a pure consistency check;
    the horizontal projection of nabla_a e_b over vertical a, b reduces to
    the base components of the Christoffels.
    """
    point = np.concatenate([np.asarray(x, float), np.asarray(u, float)])
    pack = curvature_at(AmbientField(j), point)
    m = j.m
    vertical = pack.christoffels[:m, m:, m:]  # Gamma^{c<m}_{ab}, a,b vertical
    return float(np.sqrt(np.sum(vertical**2)))


@dataclass(frozen=True)
class MeanCurvatureRecord:
    """Trace of the second fundamental form of a subtorus orbit."""

    basis: tuple
    point: np.ndarray = field(repr=False)
    vector: np.ndarray = field(repr=False)
    norm: float = 0.0
    tangent_orthogonality: float = 0.0

    def fiber_component(self, m: int) -> np.ndarray:
        return self.vector[m:]


def orbit_mean_curvature(j: JMap, subtorus_basis, point: np.ndarray) -> MeanCurvatureRecord:
    """Mean curvature vector of the orbit of a subtorus through a point.

    ``subtorus_basis`` lists Lie-algebra vectors spanning the subtorus
    direction(s); the orbit must be principal for them (block radii of u
    involved in the action bounded away from zero), otherwise
    :class:`DegenerateOrbitError` is raised.
    """
    point = np.asarray(point, dtype=float)
    basis = [np.asarray(z, dtype=float) for z in np.atleast_2d(subtorus_basis)]
    m = j.m
    u = point[m:]
    n = m + 2 * j.k
    pack = curvature_at(AmbientField(j), point)
    g = pack.metric

    tangents = []
    rhos = []
    for z in basis:
        rho = rho_star(z, j.k)
        rhos.append(rho)
        v = np.zeros(n)
        v[m:] = rho @ u
        tangents.append(v)
    vmat = np.stack(tangents, axis=1)  # (n, k')
    sv = np.linalg.svd(vmat, compute_uv=False)
    if sv.size == 0 or sv[-1] <= 1e-8 * max(sv[0], 1e-300):
        raise DegenerateOrbitError("orbit through the point has deficient dimension")

    g_orb = vmat.T @ g @ vmat
    g_orb_inv = np.linalg.inv(g_orb)
    proj = vmat @ g_orb_inv @ vmat.T @ g  # tangential projector (g-orthogonal)

    hvec = np.zeros(n)
    for alpha, (v_a, rho_a) in enumerate(zip(tangents, rhos)):
        for beta, (v_b, rho_b) in enumerate(zip(tangents, rhos)):
            nabla = np.zeros(n)
            nabla[m:] = rho_b @ (rho_a @ u)  # V_a^e d_e V_b
            nabla += np.einsum("cab,a,b->c", pack.christoffels, v_a, v_b)
            hvec += g_orb_inv[alpha, beta] * (nabla - proj @ nabla)
    norm = float(np.sqrt(hvec @ g @ hvec))
    orth = float(np.max(np.abs(vmat.T @ g @ hvec))) if len(basis) else 0.0
    return MeanCurvatureRecord(
        basis=tuple(tuple(z) for z in basis),
        point=point,
        vector=hvec,
        norm=norm,
        tangent_orthogonality=orth,
    )


@dataclass(frozen=True)
class ScanRow:
    c: float
    surface: str
    n_points: int
    n_planes: int
    sup_stat: float
    argmax_point: tuple

    def to_dict(self) -> dict:
        return {
            "c": self.c,
            "surface": self.surface,
            "n_points": self.n_points,
            "n_planes": self.n_planes,
            "sup_stat": self.sup_stat,
            "argmax_point": list(self.argmax_point),
        }


@dataclass(frozen=True)
class ScanTable:
    rows: tuple

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    def to_csv(self) -> str:
        lines = ["c,surface,n_points,n_planes,sup_stat,argmax_point"]
        for r in self.rows:
            coords = " ".join(repr(v) for v in r.argmax_point)
            lines.append(f"{r.c!r},{r.surface},{r.n_points},{r.n_planes},{r.sup_stat!r},{coords}")
        return "\n".join(lines) + "\n"

    def sup_stats(self) -> list:
        return [r.sup_stat for r in self.rows]


def _scan_planes(rng: np.random.Generator, n_points: int, n_planes: int, dim: int):
    raw = rng.standard_normal((n_points, n_planes, 2, dim))
    x = raw[:, :, 0, :]
    y = raw[:, :, 1, :]
    x = x / np.linalg.norm(x, axis=-1, keepdims=True)
    y = y - x * np.sum(x * y, axis=-1, keepdims=True)
    y = y / np.linalg.norm(y, axis=-1, keepdims=True)
    return x, y


def curvature_scan(
    j: JMap,
    c_list,
    surface: str,
    n_points: int = 256,
    n_planes: int = 64,
    seed: int = 0,
    batch: int = 256,
) -> ScanTable:
    """Sup of |K| (ambient) or |K - 1| (sphere) over sampled points and planes.

    The same points and planes are reused for every scale c, so the decay
    of the statistic along ``c_list`` is not confounded by sampling noise.
    ``c = 0`` rows are emitted exactly (flat, respectively round, metric).
    """
    if surface not in ("ambient", "sphere"):
        raise ValueError("surface must be 'ambient' or 'sphere'")
    rng = np.random.default_rng(seed)
    n = j.m + 2 * j.k
    if surface == "ambient":
        points = ball_points(rng, n, n_points)
        px, py = _scan_planes(rng, n_points, n_planes, n)
    else:
        points = sphere_points(rng, n, n_points)
        px, py = _scan_planes(rng, n_points, n_planes, n - 1)

    rows = []
    for c in c_list:
        if c == 0.0:
            rows.append(ScanRow(0.0, surface, n_points, n_planes, 0.0, tuple(np.zeros(n))))
            continue
        jc = j.scaled(float(c))
        sup_val = -1.0
        arg = None
        if surface == "ambient":
            fieldc = AmbientField(jc)
            for lo in range(0, n_points, batch):
                hi = min(lo + batch, n_points)
                g, _, _, riem, _, _ = curvature_arrays(fieldc, points[lo:hi])
                kvals = sectional_batch(
                    riem[:, None], g[:, None], px[lo:hi], py[lo:hi]
                )
                stat = np.abs(kvals)
                idx = np.unravel_index(np.argmax(stat), stat.shape)
                if stat[idx] > sup_val:
                    sup_val = float(stat[idx])
                    arg = points[lo + idx[0]]
        else:
            axes = np.argmax(np.abs(points), axis=1)
            signs = np.where(points[np.arange(n_points), axes] >= 0, 1, -1)
            for axis in range(n):
                for sign in (1, -1):
                    mask = (axes == axis) & (signs == sign)
                    if not np.any(mask):
                        continue
                    chart = SphereChart(axis=axis, sign=sign, dim=n)
                    fieldc = SphereChartField(jc, chart)
                    p = chart.project(points[mask])
                    g, _, _, riem, _, _ = curvature_arrays(fieldc, p)
                    kvals = sectional_batch(
                        riem[:, None], g[:, None], px[mask], py[mask]
                    )
                    stat = np.abs(np.abs(kvals) - 1.0)
                    idx = np.unravel_index(np.argmax(stat), stat.shape)
                    if stat[idx] > sup_val:
                        sup_val = float(stat[idx])
                        arg = points[np.nonzero(mask)[0][idx[0]]]
        rows.append(ScanRow(float(c), surface, n_points, n_planes, sup_val, tuple(arg)))
    return ScanTable(rows=tuple(rows))
