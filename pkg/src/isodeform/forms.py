"""Homogeneous polynomial forms and the spectral data of a j-map.

For a skew matrix pencil j(z), the even power traces tr(j(z)^{2r}),
r = 1..floor(m/2), determine the eigenvalues of every j(z) with
multiplicities.  Two j-maps are isospectral exactly when those forms agree
coefficientwise, which is what :func:`isospectral` decides.

Coefficients are recovered by interpolation on deterministic unit
directions instead of symbolic expansion: for k = 2 the nodes are midpoint
angles on the half-circle, which keeps the system well conditioned.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .errors import InterpolationError
from .jmaps import JMap

# values whose magnitude falls below this are compared absolutely
RELATIVE_FLOOR = 1e-12


def monomial_count(k: int, degree: int) -> int:
    return math.comb(degree + k - 1, k - 1)


def monomial_exponents(k: int, degree: int) -> np.ndarray:
    """Exponent tuples of all degree-d monomials in k variables, graded-lex."""
    exps = [e for e in itertools.product(range(degree, -1, -1), repeat=k) if sum(e) == degree]
    exps.sort(key=lambda e: tuple(-c for c in e))
    return np.array(exps, dtype=int)


def _halton_matrix(dim: int, n: int) -> np.ndarray:
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
    if dim > len(primes):
        raise ValueError("halton generator limited to 15 dimensions")
    out = np.empty((n, dim))
    for d in range(dim):
        base = primes[d]
        seq = np.zeros(n)
        idx = np.arange(1, n + 1)
        denom = base
        while np.any(idx > 0):
            seq += (idx % base) / denom
            idx //= base
            denom *= base
        out[:, d] = seq
    return out


def interpolation_nodes(k: int, degree: int) -> np.ndarray:
    """Deterministic unit directions, one per degree-d monomial.

    k = 2 uses equispaced midpoint angles on the open half-circle (distinct
    slopes guarantee invertibility).  Higher k falls back to a Halton-based
    spherical sequence.
    """
    n = monomial_count(k, degree)
    if k == 1:
        return np.ones((1, 1))
    if k == 2:
        theta = np.pi * (np.arange(n) + 0.5) / n
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)
    pts = ndtri((_halton_matrix(k, n + 1)[1:] * 0.999998) + 1e-6)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def vandermonde(nodes: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    return np.prod(nodes[:, None, :] ** exponents[None, :, :], axis=2)


@dataclass(frozen=True)
class HomogeneousForm:
    """Dense homogeneous polynomial in k variables of fixed total degree.

    ``coeffs`` is indexed by :func:`monomial_exponents` order.
    """

    k: int
    degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.ascontiguousarray(np.asarray(self.coeffs, dtype=float))
        expected = monomial_count(self.k, self.degree)
        if coeffs.shape != (expected,):
            raise ValueError(f"expected {expected} coefficients, got {coeffs.shape}")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, z) -> float | np.ndarray:
        z = np.asarray(z, dtype=float)
        exps = monomial_exponents(self.k, self.degree)
        mono = np.prod(z[..., None, :] ** exps, axis=-1)
        return mono @ self.coeffs

    @classmethod
    def zero(cls, k: int, degree: int) -> "HomogeneousForm":
        return cls(k, degree, np.zeros(monomial_count(k, degree)))

    def __add__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        self._check_compatible(other)
        return HomogeneousForm(self.k, self.degree, self.coeffs + other.coeffs)

    def __sub__(self, other: "HomogeneousForm") -> "HomogeneousForm":
        self._check_compatible(other)
        return HomogeneousForm(self.k, self.degree, self.coeffs - other.coeffs)

    def __rmul__(self, scalar: float) -> "HomogeneousForm":
        return HomogeneousForm(self.k, self.degree, float(scalar) * self.coeffs)

    def __mul__(self, other):
        if np.isscalar(other):
            return self.__rmul__(other)
        if other.k != self.k:
            raise ValueError("variable counts differ")
        deg = self.degree + other.degree
        exps_a = monomial_exponents(self.k, self.degree)
        exps_b = monomial_exponents(self.k, other.degree)
        exps_c = monomial_exponents(self.k, deg)
        index = {tuple(e): i for i, e in enumerate(exps_c)}
        coeffs = np.zeros(len(exps_c))
        for ca, ea in zip(self.coeffs, exps_a):
            for cb, eb in zip(other.coeffs, exps_b):
                coeffs[index[tuple(ea + eb)]] += ca * cb
        return HomogeneousForm(self.k, deg, coeffs)

    def _check_compatible(self, other):
        if (self.k, self.degree) != (other.k, other.degree):
            raise ValueError("forms not compatible")

    def to_dict(self) -> dict:
        return {"k": self.k, "degree": self.degree, "coeffs": self.coeffs.tolist()}

    @classmethod
    def from_dict(cls, payload: dict) -> "HomogeneousForm":
        return cls(int(payload["k"]), int(payload["degree"]), np.array(payload["coeffs"]))


def form_from_values(k: int, degree: int, values: np.ndarray) -> HomogeneousForm:
    """Interpolate a degree-d form from its values at the standard nodes."""
    nodes = interpolation_nodes(k, degree)
    vmat = vandermonde(nodes, monomial_exponents(k, degree))
    cond = np.linalg.cond(vmat)
    if not np.isfinite(cond) or cond > 1e10:
        raise InterpolationError(
            f"interpolation system unusable for k={k}, degree={degree}",
            condition_number=cond,
        )
    return HomogeneousForm(k, degree, np.linalg.solve(vmat, np.asarray(values, dtype=float)))


def power_trace_form(j: JMap, r: int) -> HomogeneousForm:
    """The degree-2r form z -> tr(j(z)^{2r})."""
    if not 1 <= r <= j.m // 2:
        raise ValueError(f"need 1 <= r <= floor(m/2) = {j.m // 2}, got r={r}")
    degree = 2 * r
    nodes = interpolation_nodes(j.k, degree)
    mats = j(nodes)
    powered = mats
    for _ in range(degree - 1):
        powered = powered @ mats
    values = np.trace(powered, axis1=-2, axis2=-1)
    return form_from_values(j.k, degree, values)


def coefficient_deviation(a: np.ndarray, b: np.ndarray) -> float:
    """Max coefficientwise deviation, relative to the larger magnitude.

    Entries where both coefficients sit below ``RELATIVE_FLOOR`` are
    compared absolutely.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.abs(a), np.abs(b))
    denom = np.where(scale < RELATIVE_FLOOR, 1.0, scale)
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0


@dataclass(frozen=True)
class IsospectralityReport:
    """Outcome of a coefficientwise power-trace comparison."""

    ok: bool
    tol: float
    per_r: dict

    def __bool__(self) -> bool:
        return self.ok

    @property
    def max_deviation(self) -> float:
        return max(self.per_r.values()) if self.per_r else 0.0

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "tol": self.tol,
            "per_r": {str(r): v for r, v in self.per_r.items()},
            "max_deviation": self.max_deviation,
        }


def isospectral(j: JMap, j2: JMap, tol: float = 1e-10) -> IsospectralityReport:
    """Decide whether j(z) and j2(z) share eigenvalues for every z.

    Compares the power-trace forms for all r up to floor(m/2); the report
    carries the worst per-r coefficient deviation.
    """
    if (j.m, j.k) != (j2.m, j2.k):
        raise ValueError(f"dimension mismatch: ({j.m},{j.k}) vs ({j2.m},{j2.k})")
    per_r = {}
    for r in range(1, j.m // 2 + 1):
        f1 = power_trace_form(j, r)
        f2 = power_trace_form(j2, r)
        per_r[r] = coefficient_deviation(f1.coeffs, f2.coeffs)
    ok = all(dev <= tol for dev in per_r.values())
    return IsospectralityReport(ok=ok, tol=tol, per_r=per_r)


def charpoly_coefficient_forms(j: JMap) -> dict[int, HomogeneousForm]:
    """Coefficient forms c_{2r}(z) of det(lambda I - j(z)) via Newton's identities.

    Odd power sums of a skew matrix vanish, so only even-index elementary
    symmetric functions survive: det(lambda I - j(z)) =
    lambda^m + sum_r c_{2r}(z) lambda^{m - 2r}.
    """
    half = j.m // 2
    power = {2 * r: power_trace_form(j, r) for r in range(1, half + 1)}
    # e_n = -(1/n) sum_{i = 2, 4, .., n} e_{n-i} p_i   (e_0 = 1, odd terms vanish)
    elem: dict[int, HomogeneousForm] = {}
    for n in range(2, 2 * half + 1, 2):
        acc = HomogeneousForm.zero(j.k, n)
        for i in range(2, n + 1, 2):
            acc = acc + (power[i] if i == n else elem[n - i] * power[i])
        elem[n] = (-1.0 / n) * acc
    return {r: elem[2 * r] for r in range(1, half + 1)}
