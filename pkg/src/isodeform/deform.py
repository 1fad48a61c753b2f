"""Continuation of j-maps along the isospectrality variety.

The variety is cut out by the coefficient equations of the power-trace
forms, with targets frozen at the seed map.  Directions are chosen in the
kernel of the linearized constraints, as transverse as possible to the
tangent space of the symmetry orbit (conjugation in O(m) plus parameter
rotations in O(k)), so the curve moves through genuinely inequivalent
maps.  Every accepted member carries a certificate: isospectrality
residual against the seed, a multistart inequivalence floor, and the
commutant dimension.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .conjugation import equivalence_search
from .errors import NoDeformationError, StepFailureError
from .forms import (
    coefficient_deviation,
    interpolation_nodes,
    isospectral,
    monomial_exponents,
    power_trace_form,
    vandermonde,
)
from .jmaps import JMap, genericity_test, random_generic_jmap
from .linalg import orthonormal_range, principal_cosines, skew_basis, skew_dim


def prop_lower_bound(m: int) -> int:
    """Parameter-count lower bound m(m-1)/2 - [m/2]([m/2]+2).

    Meaningful for m outside {1, 2, 3, 4, 6}; the two-parameter case k = 2.
    """
    half = m // 2
    return m * (m - 1) // 2 - half * (half + 2)


BOUND_EXCLUDED_M = frozenset({1, 2, 3, 4, 6})


@dataclass(frozen=True)
class TangentReport:
    """Dimension bookkeeping at one point of the variety."""

    iso_dim: int
    orbit_dim: int

    @property
    def excess(self) -> int:
        return self.iso_dim - self.orbit_dim

    def to_dict(self) -> dict:
        return {"iso_dim": self.iso_dim, "orbit_dim": self.orbit_dim, "excess": self.excess}


def _interp_solvers(k: int, degrees: list[int]) -> dict[int, np.ndarray]:
    out = {}
    for deg in degrees:
        nodes = interpolation_nodes(k, deg)
        out[deg] = (nodes, np.linalg.inv(vandermonde(nodes, monomial_exponents(k, deg))))
    return out


def constraint_matrix(j: JMap) -> np.ndarray:
    """Jacobian of the stacked power-trace coefficients at j.

    Rows are coefficient functionals of the forms
    z -> 2r tr(j(z)^{2r-1} delta(z)), one block per r; columns are
    coordinates of delta in the component-major skew basis.
    """
    m, k = j.m, j.k
    basis = skew_basis(m)
    d_so = len(basis)
    blocks = []
    for r in range(1, m // 2 + 1):
        deg = 2 * r
        nodes = interpolation_nodes(k, deg)
        vinv = np.linalg.inv(vandermonde(nodes, monomial_exponents(k, deg)))
        mats = j(nodes)
        powered = mats
        for _ in range(deg - 2):
            powered = powered @ mats
        # values[s, i*d_so + b] = z_i * tr(j(z_s)^{2r-1} E_b)
        tr_eb = np.einsum("smn,bnm->sb", powered, basis)
        values = (nodes[:, :, None] * tr_eb[:, None, :]).reshape(len(nodes), k * d_so)
        blocks.append(2 * r * (vinv @ values))
    return np.vstack(blocks)


def orbit_tangent_columns(j: JMap) -> np.ndarray:
    """Spanning set for the symmetry-orbit tangent space at j.

    Columns are conjugation directions z -> [X, j(z)], X in so(m), followed
    by parameter-rotation directions z -> j(cz), c in so(k), both in the
    component-major skew coordinate layout.
    """
    m, k = j.m, j.k
    basis_m = skew_basis(m) * np.sqrt(2.0)
    basis_k = skew_basis(k) * np.sqrt(2.0)
    sb = skew_basis(m)
    cols = []
    comm = np.einsum("bmp,ipn->bimn", basis_m, j.mats) - np.einsum("imp,bpn->bimn", j.mats, basis_m)
    for direction in comm:
        cols.append(np.einsum("imn,bmn->ib", direction, sb).reshape(-1))
    for c in basis_k:
        direction = np.einsum("li,lmn->imn", c, j.mats)
        cols.append(np.einsum("imn,bmn->ib", direction, sb).reshape(-1))
    return np.array(cols).T


def isospectral_tangents(j: JMap, sv_rel_tol: float = 1e-9, orbit_cos_tol: float = 1e-8):
    """Kernel basis of the linearized spectral constraints plus dimensions.

    Returns ``(kernel, orbit_basis, report)`` where ``kernel`` has
    orthonormal columns in skew coordinates.  ``orbit_dim`` counts the part
    of the symmetry-orbit span that actually lies inside the kernel: the
    conjugation directions always do, while parameter rotations generically
    move the pointwise spectra and therefore do not.
    """
    cmat = constraint_matrix(j)
    norms = np.linalg.norm(cmat, axis=1, keepdims=True)
    cmat = cmat / np.where(norms < 1e-300, 1.0, norms)
    _, sv, vt = np.linalg.svd(cmat)
    rank = int(np.sum(sv > sv_rel_tol * sv[0])) if sv.size and sv[0] > 0 else 0
    kernel = vt[rank:].T
    orbit = orthonormal_range(orbit_tangent_columns(j), rel_tol=sv_rel_tol)
    cosines = principal_cosines(orbit, kernel)
    orbit_dim = int(np.sum(cosines > 1.0 - orbit_cos_tol))
    report = TangentReport(iso_dim=kernel.shape[1], orbit_dim=orbit_dim)
    return kernel, orbit, report


def _coeff_targets(j: JMap) -> dict[int, np.ndarray]:
    return {r: power_trace_form(j, r).coeffs for r in range(1, j.m // 2 + 1)}


def _stacked_residual(j: JMap, targets: dict[int, np.ndarray]):
    parts = []
    rel = 0.0
    for r, target in targets.items():
        coeffs = power_trace_form(j, r).coeffs
        parts.append(coeffs - target)
        rel = max(rel, coefficient_deviation(coeffs, target))
    return np.concatenate(parts), rel


def _coords_to_jmap(coords: np.ndarray, m: int, k: int) -> JMap:
    from .linalg import coords_to_skew

    return JMap(coords_to_skew(coords, m, k))


def _jmap_to_coords(j: JMap) -> np.ndarray:
    from .linalg import skew_to_coords

    return skew_to_coords(j.mats)


def step_and_project(
    j: JMap,
    direction: np.ndarray,
    h: float,
    targets: dict[int, np.ndarray] | None = None,
    corrector_tol: float = 1e-11,
    max_iter: int = 50,
) -> JMap:
    """Predictor step along ``direction`` then Gauss-Newton correction.

    ``direction`` is a unit vector in skew coordinates; ``targets`` are the
    frozen power-trace coefficients (defaults to the current point, i.e.
    pure projection).  The corrector stops once the relative coefficient
    residual drops below ``corrector_tol`` and raises
    :class:`StepFailureError` after five consecutive non-improving
    iterations or if the tolerance is never met.
    """
    if h < 0:
        raise ValueError("step size must be nonnegative")
    m, k = j.m, j.k
    if targets is None:
        targets = _coeff_targets(j)
    coords = _jmap_to_coords(j) + h * np.asarray(direction, dtype=float)
    current = _coords_to_jmap(coords, m, k)
    res, rel = _stacked_residual(current, targets)
    fval = res @ res
    stall = 0
    for _ in range(max_iter):
        if rel <= corrector_tol:
            return current
        jac = constraint_matrix(current)
        delta, *_ = np.linalg.lstsq(jac, -res, rcond=1e-12)
        step = 1.0
        improved = False
        for _ in range(20):
            trial = _coords_to_jmap(coords + step * delta, m, k)
            res_t, rel_t = _stacked_residual(trial, targets)
            f_t = res_t @ res_t
            if f_t < fval * (1.0 - 1e-4 * step):
                coords = coords + step * delta
                current, res, rel, fval = trial, res_t, rel_t, f_t
                improved = True
                break
            step *= 0.5
        if not improved:
            stall += 1
            if stall >= 5:
                raise StepFailureError(
                    f"corrector stalled at relative residual {rel:.3e} (h={h})"
                )
        else:
            stall = 0
    if rel <= corrector_tol:
        return current
    raise StepFailureError(f"corrector did not reach {corrector_tol} in {max_iter} iterations")


@dataclass(frozen=True)
class Certificate:
    """Per-member certification record."""

    iso_residual: float
    equiv_residual: float
    commutant_dim: int

    def to_dict(self) -> dict:
        return {
            "iso_residual": self.iso_residual,
            "equiv_residual": self.equiv_residual,
            "commutant_dim": self.commutant_dim,
        }


@dataclass(frozen=True)
class IsospectralFamily:
    """A discretized curve t -> j_t with per-member certificates."""

    params: tuple
    members: tuple
    certificates: tuple
    notes: tuple = field(default=())

    def __post_init__(self):
        if len(self.params) != len(self.members) or len(self.members) != len(self.certificates):
            raise ValueError("params, members, certificates must align")
        if self.params and self.params[0] != 0.0:
            raise ValueError("parameter values must start at 0")

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        return {
            "params": list(self.params),
            "members": [j.to_dict() for j in self.members],
            "certificates": [c.to_dict() for c in self.certificates],
            "notes": list(self.notes),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "IsospectralFamily":
        return cls(
            params=tuple(float(t) for t in payload["params"]),
            members=tuple(JMap.from_dict(p) for p in payload["members"]),
            certificates=tuple(
                Certificate(
                    iso_residual=float(c["iso_residual"]),
                    equiv_residual=float(c["equiv_residual"]),
                    commutant_dim=int(c["commutant_dim"]),
                )
                for c in payload["certificates"]
            ),
            notes=tuple(payload.get("notes", ())),
        )


def _pick_direction(kernel: np.ndarray, orbit: np.ndarray, previous: np.ndarray | None) -> np.ndarray:
    """Kernel direction with the largest principal angle to the orbit span."""
    overlap = orbit.T @ kernel
    _, _, vt = np.linalg.svd(overlap)
    direction = kernel @ vt[-1]
    direction /= np.linalg.norm(direction)
    if previous is not None and direction @ previous < 0:
        direction = -direction
    elif previous is None:
        nz = np.nonzero(np.abs(direction) > 1e-12)[0]
        if nz.size and direction[nz[0]] < 0:
            direction = -direction
    return direction


def build_family(
    j0: JMap,
    n_steps: int,
    h: float,
    seed: int = 0,
    iso_tol: float = 1e-10,
    corrector_tol: float = 1e-11,
    certify_restarts: int = 12,
    max_halvings: int = 12,
) -> IsospectralFamily:
    """Continuation from a generic seed, certifying every accepted member.

    Preconditions: the commutant of j0 is trivial and the constraint kernel
    strictly exceeds the orbit span.  The step direction is recomputed at
    every accepted member (sign-aligned with the previous one); on
    corrector failure the step is halved, up to ``max_halvings`` times.
    """
    if genericity_test(j0) != 0:
        raise NoDeformationError("seed map fails the trivial-commutant hypothesis")
    kernel, orbit, report = isospectral_tangents(j0)
    if report.excess < 1:
        raise NoDeformationError(f"no transverse kernel direction (excess = {report.excess})")
    targets = _coeff_targets(j0)

    def certify(jt: JMap, restart_seed: int) -> Certificate:
        rep = isospectral(j0, jt, tol=iso_tol)
        witness = equivalence_search(j0, jt, restarts=certify_restarts, seed=restart_seed)
        return Certificate(
            iso_residual=rep.max_deviation,
            equiv_residual=witness.residual,
            commutant_dim=genericity_test(jt),
        )

    params = [0.0]
    members = [j0]
    certificates = [certify(j0, seed)]
    notes: list[str] = []
    direction = None
    current = j0
    t = 0.0
    for step_idx in range(n_steps):
        kernel, orbit, report = isospectral_tangents(current)
        if report.excess < 1:
            notes.append(f"truncated at step {step_idx}: excess dropped to {report.excess}")
            break
        direction = _pick_direction(kernel, orbit, direction)
        h_step = h
        accepted = None
        for _ in range(max_halvings + 1):
            try:
                accepted = step_and_project(
                    current, direction, h_step, targets=targets, corrector_tol=corrector_tol
                )
                break
            except StepFailureError:
                h_step *= 0.5
        if accepted is None:
            notes.append(f"truncated at step {step_idx}: corrector failed down to h={h_step}")
            break
        cert = certify(accepted, seed ^ (step_idx + 1))
        if cert.iso_residual > iso_tol:
            notes.append(
                f"truncated at step {step_idx}: certification failed "
                f"(iso residual {cert.iso_residual:.3e} > {iso_tol})"
            )
            break
        t += h_step
        params.append(t)
        members.append(accepted)
        certificates.append(cert)
        current = accepted
    return IsospectralFamily(
        params=tuple(params),
        members=tuple(members),
        certificates=tuple(certificates),
        notes=tuple(notes),
    )


def scale_family(fam: IsospectralFamily, c: float) -> IsospectralFamily:
    """Scale every member by c > 0; certificates transform exactly.

    Power traces scale by c^{2r}, so relative isospectrality residuals are
    unchanged; the equivalence mismatch is linear in the scale and the
    commutant does not move.
    """
    if c <= 0:
        raise ValueError("scale must be positive")
    return IsospectralFamily(
        params=fam.params,
        members=tuple(j.scaled(c) for j in fam.members),
        certificates=tuple(
            Certificate(
                iso_residual=cert.iso_residual,
                equiv_residual=cert.equiv_residual * c,
                commutant_dim=cert.commutant_dim,
            )
            for cert in fam.certificates
        ),
        notes=fam.notes,
    )


def find_generic_jmap(m: int, k: int, seed: int, max_attempts: int = 100):
    """Re-seed until the draw is certified generic and deformable.

    Returns ``(jmap, accepted_seed, report)``.  Certification: trivial
    commutant plus at least one kernel direction transverse to the orbit.
    """
    for attempt in range(max_attempts):
        candidate_seed = seed + attempt
        j = random_generic_jmap(m, k, candidate_seed)
        if genericity_test(j) != 0:
            continue
        _, _, report = isospectral_tangents(j)
        if report.excess >= 1:
            return j, candidate_seed, report
    raise NoDeformationError(f"no generic draw found in {max_attempts} attempts from seed {seed}")
