"""Orthogonal conjugation machinery for skew matrix pencils.

Two ingredients:

* :func:`skew_canonical_form` block-diagonalizes one skew matrix into
  2x2 rotation-generator blocks sorted by magnitude, with deterministic
  tie-breaking, which yields pointwise conjugators (:func:`conjugator_at`).

* :func:`equivalence_search` looks for a single pair (A, C) of orthogonal
  maps with A j(z) A^T = j2(Cz) for all z, by damped Gauss-Newton on the
  product of orthogonal groups with multistart.  A small best residual
  certifies equivalence; a residual floor over many restarts is evidence
  (never proof) of inequivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotIsospectralError
from .jmaps import JMap, conjugate_jmap
from .linalg import polar_orthogonal, random_orthogonal, skew_basis

JB = np.array([[0.0, -1.0], [1.0, 0.0]])


def _pin_pair(v1: np.ndarray, v2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotate an invariant 2-plane basis to a deterministic representative.

    In-plane rotations preserve the canonical block, so we fix the phase:
    at the coordinate where the plane has the largest weight, the second
    vector vanishes and the first is positive.
    """
    weight = v1 * v1 + v2 * v2
    idx = int(np.argmax(weight))
    phi = np.arctan2(v2[idx], v1[idx])
    c, s = np.cos(phi), np.sin(phi)
    return c * v1 + s * v2, -s * v1 + c * v2


def skew_canonical_form(mat: np.ndarray, cluster_rel_gap: float = 1e-8):
    """Orthogonal Q and block magnitudes theta with Q^T M Q canonical.

    The canonical form is blockdiag(theta_1 * JB, ..., theta_p * JB, 0)
    with theta sorted descending.  Within an eigenvalue cluster (relative
    gap below ``cluster_rel_gap`` times the spectral radius) blocks are
    ordered by the angle of their first-coordinate components, ties broken
    lexicographically, so the output is deterministic.

    Returns ``(Q, thetas)`` where ``thetas`` has length floor(m/2) and is
    padded with zeros when M is singular.
    """
    mat = np.asarray(mat, dtype=float)
    m = mat.shape[0]
    evals, evecs = np.linalg.eigh(-(mat @ mat))  # ascending, all >= 0 up to noise
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    thetas_all = np.sqrt(np.clip(evals, 0.0, None))
    radius = thetas_all[0] if thetas_all.size else 0.0
    # eigh noise on -M^2 is ~eps * radius^2, so theta noise is ~sqrt(eps) * radius
    zero_tol = max(radius, 1e-300) * 1e-7

    pairs = []  # (theta, v1, v2)
    zero_cols = []
    i = 0
    while i < m:
        if thetas_all[i] <= zero_tol:
            zero_cols.append(evecs[:, i])
            i += 1
            continue
        # gather the numerical eigenspace of this theta
        jend = i + 1
        while jend < m and abs(thetas_all[jend] - thetas_all[i]) <= cluster_rel_gap * max(radius, 1.0):
            jend += 1
        space = evecs[:, i:jend].copy()
        theta_rep = float(np.mean(thetas_all[i:jend]))
        while space.shape[1] >= 2:
            v1 = space[:, 0]
            v1 = v1 / np.linalg.norm(v1)
            v2 = mat @ v1 / theta_rep
            v2 = v2 - v1 * (v1 @ v2)
            v2 = v2 / np.linalg.norm(v2)
            v1, v2 = _pin_pair(v1, v2)
            pairs.append((theta_rep, v1, v2))
            # deflate the plane from the remaining eigenspace
            rem = space - np.outer(v1, v1 @ space) - np.outer(v2, v2 @ space)
            q, r = np.linalg.qr(rem)
            keep = np.abs(np.diag(r)) > 1e-10
            space = q[:, keep]
        # an odd leftover only occurs at the noise floor; treat it as kernel
        zero_cols.extend(space.T)
        i = jend

    # order: theta descending; within clusters by first-component angle
    def sort_key(entry):
        theta, v1, v2 = entry
        return (-theta, np.arctan2(v2[0], v1[0]), tuple(np.round(v1, 12)))

    pairs.sort(key=sort_key)

    cols = []
    thetas = []
    for theta, v1, v2 in pairs:
        cols.extend([v1, v2])
        thetas.append(theta)
    for v in zero_cols:
        cols.append(v)
    q = np.stack(cols, axis=1)
    # polish orthogonality lost to deflation arithmetic
    q = polar_orthogonal(q)
    padded = np.zeros(m // 2)
    padded[: len(thetas)] = thetas
    return q, padded


def canonical_block_matrix(thetas: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros((m, m))
    for l, theta in enumerate(thetas):
        out[2 * l : 2 * l + 2, 2 * l : 2 * l + 2] = theta * JB
    return out


def conjugator_at(j: JMap, j2: JMap, z, rel_tol: float = 1e-9) -> np.ndarray:
    """Orthogonal A with A j(z) A^T = j2(z), built from canonical forms.

    Raises :class:`NotIsospectralError` when the sorted block magnitudes of
    the two sides differ by more than ``rel_tol`` relative to |j(z)|_F; the
    error carries the best-effort conjugator and the mismatch.
    """
    z = np.asarray(z, dtype=float)
    if not np.any(z):
        raise ValueError("conjugator undefined at z = 0")
    m1 = j(z)
    m2 = j2(z)
    q1, th1 = skew_canonical_form(m1)
    q2, th2 = skew_canonical_form(m2)
    amat = q2 @ q1.T
    scale = max(np.linalg.norm(m1), 1e-300)
    mismatch = float(np.sqrt(2.0) * np.linalg.norm(th1 - th2))
    if mismatch > rel_tol * scale:
        raise NotIsospectralError(
            f"spectra differ at z={z.tolist()}: canonical mismatch {mismatch:.3e} "
            f"(tolerance {rel_tol * scale:.3e})",
            mismatch=mismatch,
            best_conjugator=amat,
        )
    return amat


def _canonical_tuple_basis(j: JMap, z_ref: np.ndarray, z_ref2: np.ndarray) -> np.ndarray:
    """Orthogonal Q attached to the conjugation class of the tuple (J_1..J_k).

    First reduce j(z_ref) to canonical form, then spend the leftover
    per-block rotation freedom on j(z_ref2): each block is rotated so that
    its first nonzero coupling column points in a fixed direction.  For
    generic input the result depends on the tuple only through conjugation,
    which makes downstream searches conjugation-equivariant.
    """
    q, thetas = skew_canonical_form(j(z_ref))
    m = j.m
    n2 = q.T @ j(z_ref2) @ q
    nblocks = int(np.sum(thetas > 0))
    for l in range(nblocks):
        rows = slice(2 * l, 2 * l + 2)
        coupling = n2[rows, :].copy()
        coupling[:, 2 * l : 2 * l + 2] = 0.0
        norms = np.linalg.norm(coupling, axis=0)
        cols = np.nonzero(norms > 1e-8 * max(np.linalg.norm(n2), 1.0))[0]
        if cols.size == 0:
            continue
        v = coupling[:, cols[0]]
        phi = np.arctan2(v[1], v[0])
        c, s = np.cos(phi), np.sin(phi)
        rot = np.array([[c, -s], [s, c]])
        q[:, rows] = q[:, rows] @ rot
        n2 = q.T @ j(z_ref2) @ q
    if m % 2 == 1:
        # pin the sign of the one-dimensional kernel column
        col = n2[:, -1]
        idx = int(np.argmax(np.abs(col)))
        if np.abs(col[idx]) > 1e-10 and col[idx] < 0:
            q[:, -1] = -q[:, -1]
    return q


@dataclass(frozen=True)
class EquivalenceWitness:
    """Best (A, C) pair found and frobenius residual over the z-sample."""

    A: np.ndarray = field(repr=False)
    C: np.ndarray = field(repr=False)
    residual: float

    def __post_init__(self):
        for name, mat in (("A", self.A), ("C", self.C)):
            mat = np.asarray(mat, dtype=float)
            if np.max(np.abs(mat.T @ mat - np.eye(mat.shape[0]))) > 1e-10:
                raise ValueError(f"witness {name} is not orthogonal")
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)
        if self.residual < 0:
            raise ValueError("residual must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "A": self.A.reshape(-1).tolist(),
            "C": self.C.reshape(-1).tolist(),
            "residual": self.residual,
        }


def _z_sample(k: int) -> np.ndarray:
    """Fixed deterministic sample of 4k unit directions."""
    n = 4 * k
    if k == 2:
        theta = np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    from .forms import _halton_matrix

    pts = _halton_matrix(k, n + 1)[1:] - 0.5
    pts[np.all(np.abs(pts) < 1e-9, axis=1)] = 1.0 / np.sqrt(k)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def _residual_stack(jc_mats, j2c, amat, cmat, zs):
    conj = np.einsum("mp,spq,nq->smn", amat, np.einsum("si,imn->smn", zs, jc_mats), amat)
    target = j2c(zs @ cmat.T)
    return conj - target, conj


def _gauss_newton(jc: JMap, j2c: JMap, amat, cmat, zs, sb_m, sb_k, max_iter=150, lam0=1e-3):
    """Levenberg-Marquardt on F(A, C) = sum_s |A j(z_s) A^T - j2(C z_s)|_F^2.

    Tangent steps are parametrized by skew matrices and retracted through
    the orthogonal polar factor.
    """
    m = jc.m
    lam = lam0
    res, conj = _residual_stack(jc.mats, j2c, amat, cmat, zs)
    fval = float(np.sum(res * res))
    n_a, n_c = len(sb_m), len(sb_k)
    stall = 0
    for _ in range(max_iter):
        if fval < 1e-28:
            break
        # d/dX: [X_b, A j(z) A^T];  d/dY: -j2((Y_b C) z)
        ja = np.einsum("bmp,spn->sbmn", sb_m, conj) - np.einsum("smp,bpn->sbmn", conj, sb_m)
        cz = np.einsum("bij,jl,sl->sbi", sb_k, cmat, zs)
        jc_cols = -np.einsum("sbi,imn->sbmn", cz, j2c.mats)
        jac = np.concatenate(
            [ja.reshape(len(zs), n_a, -1), jc_cols.reshape(len(zs), n_c, -1)], axis=1
        )
        jac = jac.transpose(0, 2, 1).reshape(-1, n_a + n_c)
        rvec = res.reshape(-1)
        jtj = jac.T @ jac
        jtr = jac.T @ rvec
        improved = False
        for _ in range(12):
            try:
                delta = np.linalg.solve(jtj + lam * np.eye(n_a + n_c), -jtr)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            xa = np.einsum("b,bmn->mn", delta[:n_a], sb_m)
            xc = np.einsum("b,bmn->mn", delta[n_a:], sb_k)
            amat_new = polar_orthogonal((np.eye(m) + xa) @ amat)
            cmat_new = polar_orthogonal((np.eye(jc.k) + xc) @ cmat)
            res_new, conj_new = _residual_stack(jc.mats, j2c, amat_new, cmat_new, zs)
            fnew = float(np.sum(res_new * res_new))
            if fnew < fval:
                amat, cmat, res, conj, fval = amat_new, cmat_new, res_new, conj_new, fnew
                lam = max(lam * 0.3, 1e-14)
                improved = True
                break
            lam *= 4.0
        if not improved:
            stall += 1
            if stall >= 2:
                break
        else:
            stall = 0
    return amat, cmat, float(np.sqrt(fval))


def _c_grid(k: int) -> list[np.ndarray]:
    if k != 2:
        return [np.eye(k)]
    out = []
    for s in range(8):
        th = 2 * np.pi * s / 8
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        out.append(rot)
        out.append(rot @ np.diag([1.0, -1.0]))
    return out


def equivalence_search(j: JMap, j2: JMap, restarts: int = 20, seed: int = 0) -> EquivalenceWitness:
    """Multistart search for orthogonal (A, C) with A j(z) A^T = j2(Cz).

    The two pencils are first conjugated into canonical bases so the found
    residual depends on the inputs only through their conjugation classes.
    Restart ``r`` draws its start from a generator seeded with
    ``seed XOR r``; results merge by minimum residual, lowest index first.
    The returned residual is the frobenius norm of the stacked mismatch
    over the fixed z-sample.
    """
    if (j.m, j.k) != (j2.m, j2.k):
        raise ValueError("dimension mismatch")
    zs = _z_sample(j.k)
    z_ref, z_ref2 = zs[0], zs[1]
    q1 = _canonical_tuple_basis(j, z_ref, z_ref2)
    q2 = _canonical_tuple_basis(j2, z_ref, z_ref2)
    jc = conjugate_jmap(j, q1.T)
    j2c = conjugate_jmap(j2, q2.T)
    sb_m = skew_basis(j.m) * np.sqrt(2.0)
    sb_k = skew_basis(j.k) * np.sqrt(2.0)

    starts: list[tuple[np.ndarray, np.ndarray]] = [(np.eye(j.m), np.eye(j.k))]
    for cmat in _c_grid(j.k):
        starts.append((np.eye(j.m), cmat))
    while len(starts) < restarts:
        r = len(starts)
        rng = np.random.default_rng(seed ^ r)
        a0 = random_orthogonal(rng, j.m, det_sign=1 if r % 2 == 0 else -1)
        c0 = random_orthogonal(rng, j.k, det_sign=1 if (r // 2) % 2 == 0 else -1)
        starts.append((a0, c0))

    best = None
    for a0, c0 in starts[:max(restarts, 1)]:
        amat, cmat, resid = _gauss_newton(jc, j2c, a0, c0, zs, sb_m, sb_k)
        if best is None or resid < best[2] - 1e-15:
            best = (amat, cmat, resid)
    amat, cmat, resid = best
    return EquivalenceWitness(A=q2 @ amat @ q1.T, C=cmat, residual=resid)
