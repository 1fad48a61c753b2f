"""Machine checks of the hypotheses behind the isospectrality argument.

For each codimension-one subtorus (encoded by its orthogonal direction Z)
and each pair of family members, three things must hold:

* the pointwise conjugator at Z aligns the two bilinear forms in the Z
  component (checked on random argument pairs);
* the candidate intertwining map (A on the base, identity on fibers)
  commutes with the torus action and preserves the ball and sphere;
* mean curvature vectors of the subtorus orbits match through that map.

The full-torus branch needs no conjugator: the torus-reduced data (base
metric, fiber radii) coincides for any two j-maps, which is checked as an
exact frame identity.  Non-isometry evidence combines the trivial
commutant test, a multistart inequivalence floor, and trace-word
separation over a grid of parameter rotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .conjugation import conjugator_at, equivalence_search
from .curvature import orbit_mean_curvature
from .deform import IsospectralFamily
from .errors import NotIsospectralError
from .geometry import AmbientMetric, torus_action
from .jmaps import JMap, genericity_test, substitute_basis, trace_word_invariants
from .sampling import principal_sphere_points


@dataclass(frozen=True)
class SubtorusDirection:
    """Primitive integer vector orthogonal to a codimension-one subtorus."""

    z: tuple

    def __post_init__(self):
        z = tuple(int(v) for v in self.z)
        if not any(z):
            raise ValueError("direction must be nonzero")
        if math.gcd(*(abs(v) for v in z)) not in (0, 1):
            raise ValueError("direction entries must be coprime")
        object.__setattr__(self, "z", z)

    @property
    def k(self) -> int:
        return len(self.z)

    def vector(self) -> np.ndarray:
        return np.array(self.z, dtype=float)

    def kernel_basis(self) -> np.ndarray:
        """Basis of the orthogonal complement (the subtorus direction(s))."""
        if self.k == 2:
            a, b = self.z
            return np.array([[-b, a]], dtype=float)
        vec = self.vector()
        _, _, vt = np.linalg.svd(vec[None, :])
        return vt[1:]

    def __str__(self) -> str:
        return "(" + ",".join(str(v) for v in self.z) + ")"


def default_directions(k: int, max_norm: int = 2) -> list[SubtorusDirection]:
    """All primitive integer directions with max-norm bound, up to sign."""
    seen = set()
    out = []
    for cand in product(range(-max_norm, max_norm + 1), repeat=k):
        if not any(cand):
            continue
        if math.gcd(*(abs(v) for v in cand)) != 1:
            continue
        first = next(v for v in cand if v != 0)
        canon = cand if first > 0 else tuple(-v for v in cand)
        if canon in seen:
            continue
        seen.add(canon)
        out.append(SubtorusDirection(z=canon))
    out.sort(key=lambda d: (max(abs(v) for v in d.z), d.z))
    return out


def _conjugator_or_best(j: JMap, j2: JMap, zvec: np.ndarray):
    """Conjugator at z, falling back to the best-effort one on mismatch."""
    try:
        return conjugator_at(j, j2, zvec), None
    except NotIsospectralError as err:
        return err.best_conjugator, float(err.mismatch)


def check_eq32(j: JMap, j2: JMap, direction: SubtorusDirection, samples: int = 200,
               seed: int = 0) -> float:
    """Alignment of the bilinear forms in the Z component through A_Z.

    Verifies <B'(Ax, Ay), Z> = <B(x, y), Z> on random pairs, normalized by
    |x| |y| |j(Z)|_F; equivalent to A j(Z) A^T = j'(Z).  When the spectra
    at Z do not even match, the canonical mismatch is folded into the
    returned residual instead of being raised, so negative controls report
    a number.
    """
    zvec = direction.vector()
    amat, mismatch = _conjugator_or_best(j, j2, zvec)
    m1 = j(zvec)
    m2 = j2(zvec)
    scale = np.linalg.norm(m1)
    rng = np.random.default_rng(seed)
    xs = rng.standard_normal((samples, j.m))
    ys = rng.standard_normal((samples, j.m))
    lhs = np.einsum("pm,mn,pn->p", ys @ amat.T, m2, xs @ amat.T)
    rhs = np.einsum("pm,mn,pn->p", ys, m1, xs)
    dev = np.abs(lhs - rhs) / (
        np.linalg.norm(xs, axis=1) * np.linalg.norm(ys, axis=1) * scale
    )
    out = float(np.max(dev))
    if mismatch is not None:
        out = max(out, mismatch / max(scale, 1e-300))
    return out


def check_tau_equivariance(j: JMap, j2: JMap, direction: SubtorusDirection,
                           samples: int = 100, seed: int = 0,
                           a_override: np.ndarray | None = None) -> float:
    """The map (x, u) -> (Ax, u) commutes with the torus and preserves norms."""
    if a_override is not None:
        amat = a_override
    else:
        amat, _ = _conjugator_or_best(j, j2, direction.vector())
    rng = np.random.default_rng(seed)
    m, k = j.m, j.k
    worst = 0.0
    for _ in range(samples):
        point = rng.standard_normal(m + 2 * k)
        zbar = rng.random(k)
        tau_point = np.concatenate([amat @ point[:m], point[m:]])
        lhs = torus_action(zbar, tau_point, m)
        moved = torus_action(zbar, point, m)
        rhs = np.concatenate([amat @ moved[:m], moved[m:]])
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
        worst = max(worst, abs(np.linalg.norm(tau_point) - np.linalg.norm(point)))
    return worst


def check_mean_curvature_intertwining(j: JMap, j2: JMap, direction: SubtorusDirection,
                                      samples: int = 25, seed: int = 0) -> float:
    """Subtorus-orbit mean curvature carries over through (x, u) -> (Ax, u).

    The map is the identity on fibers, so only the fiber components are
    compared; they agree because fibers are totally geodesic and the orbit
    curvature is a Euclidean quantity there.
    """
    amat, _ = _conjugator_or_best(j, j2, direction.vector())
    kbasis = direction.kernel_basis()
    rng = np.random.default_rng(seed)
    pts = principal_sphere_points(rng, j.m, j.k, samples)
    worst = 0.0
    for point in pts:
        rec1 = orbit_mean_curvature(j, kbasis, point)
        moved = np.concatenate([amat @ point[: j.m], point[j.m :]])
        rec2 = orbit_mean_curvature(j2, kbasis, moved)
        worst = max(worst, float(np.max(np.abs(rec1.fiber_component(j.m) - rec2.fiber_component(j.m)))))
    return worst


def check_full_torus_branch(j: JMap, j2: JMap, samples: int = 50, seed: int = 0) -> float:
    """Exact equality of the torus-reduced data of the two metrics.

    The reduced metric in (base point, block radii) coordinates is the
    identity for every j-map: the horizontal lift frame and the radial
    fiber directions form a g-orthonormal set.  Checked for both inputs at
    shared sample points.
    """
    rng = np.random.default_rng(seed)
    pts = principal_sphere_points(rng, j.m, j.k, samples)
    worst = 0.0
    m, k = j.m, j.k
    n = m + 2 * k
    for metric in (AmbientMetric(j), AmbientMetric(j2)):
        g = metric.matrix(pts)
        a = metric.a_matrix(pts)
        frames = np.zeros((len(pts), n, m + k))
        frames[:, :m, :m] = np.eye(m)
        frames[:, m:, :m] = a
        u = pts[:, m:].reshape(len(pts), k, 2)
        radii = np.linalg.norm(u, axis=2)
        for i in range(k):
            frames[:, m + 2 * i : m + 2 * i + 2, m + i] = u[:, i] / radii[:, i, None]
        gram = np.einsum("pan,pab,pbl->pnl", frames, g, frames, optimize=True)
        worst = max(worst, float(np.max(np.abs(gram - np.eye(m + k)))))
    return worst


@dataclass(frozen=True)
class CheckRecord:
    pair: tuple
    direction: str
    check: str
    residual: float
    tol: float
    passed: bool
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "direction": self.direction,
            "check": self.check,
            "residual": self.residual,
            "tol": self.tol,
            "passed": self.passed,
            **({"error": self.error} if self.error else {}),
        }


@dataclass(frozen=True)
class HypothesisReport:
    records: tuple
    tolerances: dict
    passed: bool

    def failures(self) -> list:
        return [r for r in self.records if not r.passed]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tolerances": dict(self.tolerances),
            "records": [r.to_dict() for r in self.records],
        }


DEFAULT_SUITE_TOLERANCES = {
    "eq32": 1e-10,
    "tau_equivariance": 1e-12,
    "mean_curvature": 1e-8,
    "full_torus": 1e-10,
}


def run_hypothesis_suite(
    family: IsospectralFamily,
    directions: list[SubtorusDirection] | None = None,
    seed: int = 0,
    samples: int = 200,
    mean_curv_samples: int = 12,
    tolerances: dict | None = None,
) -> HypothesisReport:
    """All checks for every consecutive and endpoint pair of the family.

    Sub-check errors are recorded as failed records (the suite continues).
    A family of length one passes vacuously.
    """
    tol = dict(DEFAULT_SUITE_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    k = family.members[0].k if family.members else 2
    if directions is None:
        directions = default_directions(k)
    pairs = [(i, i + 1) for i in range(len(family) - 1)]
    if len(family) > 2:
        pairs.append((0, len(family) - 1))

    records = []

    def run(pair, name, label, fn, tol_key):
        try:
            residual = fn()
            records.append(
                CheckRecord(pair=pair, direction=label, check=name, residual=residual,
                            tol=tol[tol_key], passed=residual <= tol[tol_key])
            )
        except Exception as exc:  # recorded, suite continues
            records.append(
                CheckRecord(pair=pair, direction=label, check=name, residual=float("inf"),
                            tol=tol[tol_key], passed=False, error=f"{type(exc).__name__}: {exc}")
            )

    for pair_idx, (i, jdx) in enumerate(pairs):
        ja, jb = family.members[i], family.members[jdx]
        for d_idx, direction in enumerate(directions):
            base_seed = seed ^ (pair_idx * 1009 + d_idx * 9176) if seed else pair_idx * 1009 + d_idx * 9176
            run((i, jdx), "eq32", str(direction),
                lambda ja=ja, jb=jb, d=direction, s=base_seed: check_eq32(ja, jb, d, samples, s),
                "eq32")
            run((i, jdx), "tau_equivariance", str(direction),
                lambda ja=ja, jb=jb, d=direction, s=base_seed: check_tau_equivariance(
                    ja, jb, d, max(20, samples // 10), s + 1),
                "tau_equivariance")
            run((i, jdx), "mean_curvature", str(direction),
                lambda ja=ja, jb=jb, d=direction, s=base_seed: check_mean_curvature_intertwining(
                    ja, jb, d, mean_curv_samples, s + 2),
                "mean_curvature")
        run((i, jdx), "full_torus", "full-torus",
            lambda ja=ja, jb=jb, s=seed ^ (pair_idx + 7777): check_full_torus_branch(ja, jb, 50, s),
            "full_torus")

    passed = all(r.passed for r in records) if records else True
    return HypothesisReport(records=tuple(records), tolerances=tol, passed=passed)


@dataclass(frozen=True)
class EvidenceRecord:
    """Outcome of the non-isometry evidence procedure."""

    commutant_dim: int
    floor: float
    restarts: int
    separation: float
    grid_size: int
    threshold: float
    verdict: str
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "commutant_dim": self.commutant_dim,
            "floor": self.floor,
            "restarts": self.restarts,
            "separation": self.separation,
            "grid_size": self.grid_size,
            "threshold": self.threshold,
            "verdict": self.verdict,
            "witness": self.witness,
        }


def _o2_grid(n: int) -> list[np.ndarray]:
    out = []
    for s in range(n):
        th = 2 * np.pi * s / n
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        out.append(rot)
        out.append(rot @ np.diag([1.0, -1.0]))
    return out


def trace_word_separation(j: JMap, j2: JMap, grid_size: int = 360, max_len: int = 4) -> float:
    """min over grid rotations C of the trace-word distance to (j2 o C).

    A strictly positive value over a fine grid is necessary-condition
    evidence against equivalence; zero at some C only means that C is a
    candidate, not a proof of equivalence.
    """
    base = trace_word_invariants(j, max_len)
    if j.k != 2:
        return float(np.max(np.abs(base - trace_word_invariants(j2, max_len))))
    best = np.inf
    for cmat in _o2_grid(grid_size):
        cand = trace_word_invariants(substitute_basis(j2, cmat), max_len)
        best = min(best, float(np.max(np.abs(base - cand))))
    return best


def non_isometry_evidence(
    j: JMap,
    j2: JMap,
    restarts: int = 50,
    seed: int = 0,
    grid_size: int = 360,
    threshold: float = 1e-3,
    equivalence_tol: float = 1e-8,
) -> EvidenceRecord:
    """Evidence that the metrics of two j-maps are not isometric.

    Requires the trivial-commutant hypothesis on j (otherwise the verdict
    is inconclusive).  A small search residual proves equivalence (hence
    isometric construction data); a floor above the threshold is reported
    as evidence, never as proof.
    """
    commutant = genericity_test(j)
    if commutant != 0:
        return EvidenceRecord(
            commutant_dim=commutant, floor=float("nan"), restarts=0, separation=float("nan"),
            grid_size=0, threshold=threshold,
            verdict="inconclusive (trivial-commutant hypothesis unmet)",
        )
    witness = equivalence_search(j, j2, restarts=restarts, seed=seed)
    separation = trace_word_separation(j, j2, grid_size=grid_size)
    if witness.residual <= equivalence_tol:
        verdict = "isometric construction data (equivalent j-maps)"
    elif witness.residual >= threshold:
        verdict = f"not isometric, at evidence level rho={witness.residual:.3e} with {restarts} restarts"
    else:
        verdict = "inconclusive (residual floor below threshold)"
    return EvidenceRecord(
        commutant_dim=commutant,
        floor=witness.residual,
        restarts=restarts,
        separation=separation,
        grid_size=grid_size,
        threshold=threshold,
        verdict=verdict,
        witness=witness.to_dict(),
    )
