"""Spectrally determined quantities at desk scale.

Isospectral metrics share every heat-trace coefficient; the ones that are
computable here are the volume (leading coefficient), the boundary area
(half-power coefficient for the ball), and the total scalar curvature.
Comparisons across family members always reuse the same sample points
(common random numbers), so the paired difference carries far less noise
than either absolute estimate.

All estimators accumulate in a fixed batch order (64 batches) and report a
batch-means standard error, which keeps results bitwise reproducible for a
fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curvature import AmbientField, SphereChartField, curvature_arrays
from .errors import InvariantViolationError
from .geometry import AmbientMetric, SphereChart, torus_action, torus_rotation
from .jmaps import JMap
from .sampling import ball_points, halton_ball_points, halton_sphere_points, sphere_points

N_BATCHES = 64

EXPERIMENTAL_INTEGRANDS = ("riem_sq", "ric_sq")


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def unit_sphere_area(n_dim_sphere: int) -> float:
    """Area of the round unit sphere S^{n} (an n-dimensional manifold)."""
    n = n_dim_sphere + 1  # ambient dimension
    return 2 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class IntegralEstimate:
    """Value of an integral with a batch-means error bar."""

    value: float
    std_error: float
    n_samples: int
    method: str
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError("estimate must be finite")
        if self.std_error < 0:
            raise ValueError("std_error must be nonnegative")

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
            "method": self.method,
            **({"diagnostics": self.diagnostics} if self.diagnostics else {}),
        }


def _batch_mean_se(values: np.ndarray) -> tuple[float, float]:
    """Mean and batch-means standard error with a fixed 64-batch split."""
    usable = (len(values) // N_BATCHES) * N_BATCHES
    batches = values[:usable].reshape(N_BATCHES, -1).mean(axis=1)
    mean = float(batches.mean())
    se = float(batches.std(ddof=1) / np.sqrt(N_BATCHES))
    return mean, se


def _tangent_frames(points: np.ndarray) -> np.ndarray:
    """Orthonormal tangent frames on the sphere via Householder reflections.

    Returns (P, n, n-1): columns are tangent vectors at each point.
    """
    npts, n = points.shape
    sign = np.where(points[:, -1] >= 0, 1.0, -1.0)
    v = points.copy()
    v[:, -1] += sign
    vnorm2 = np.sum(v * v, axis=1, keepdims=True)
    # H = I - 2 v v^T / |v|^2 maps  -sign * e_n -> q; its first n-1 columns span T_q
    h = -2.0 * v[:, :, None] * v[:, None, :] / vnorm2[:, :, None]
    h[:, np.arange(n), np.arange(n)] += 1.0
    frames = h[:, :, : n - 1]
    frames[:, :, :] *= 1.0
    return frames


def _sphere_density(j: JMap, points: np.ndarray) -> np.ndarray:
    """sqrt(det) of the induced metric Gram on orthonormal round frames."""
    metric = AmbientMetric(j)
    frames = _tangent_frames(points)
    g = metric.matrix(points)
    gram = np.einsum("pai,pab,pbk->pik", frames, g, frames, optimize=True)
    return np.sqrt(np.linalg.det(gram))


def ball_volume(j: JMap, n_check: int = 10_000, seed: int = 0, det_tol: float = 1e-12) -> IntegralEstimate:
    """Volume of the unit ball: exactly Euclidean because det G is 1.

    The identity is asserted numerically at ``n_check`` sampled points.
    """
    n = j.m + 2 * j.k
    rng = np.random.default_rng(seed)
    pts = ball_points(rng, n, n_check)
    dev = AmbientMetric(j).det_deviation(pts)
    if dev > det_tol:
        raise InvariantViolationError(f"det deviates from 1 by {dev:.3e}")
    return IntegralEstimate(
        value=unit_ball_volume(n),
        std_error=0.0,
        n_samples=n_check,
        method="exact",
        diagnostics={"max_det_deviation": dev},
    )


def sphere_volume(j: JMap, n_samples: int = 2**20, seed: int = 0, method: str = "mc") -> IntegralEstimate:
    """Riemannian volume of the unit sphere under the metric of j.

    Monte Carlo (or digitally shifted Halton) over the round sphere with
    the exact density ratio as integrand.
    """
    n = j.m + 2 * j.k
    if method == "mc":
        pts = sphere_points(np.random.default_rng(seed), n, n_samples)
    elif method == "halton":
        pts = halton_sphere_points(n_samples, n, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    vals = np.empty(n_samples)
    for lo in range(0, n_samples, 65536):
        hi = min(lo + 65536, n_samples)
        vals[lo:hi] = _sphere_density(j, pts[lo:hi])
    mean, se = _batch_mean_se(vals)
    area = unit_sphere_area(n - 1)
    return IntegralEstimate(value=mean * area, std_error=se * area, n_samples=n_samples, method=method)


def boundary_area(j: JMap, n_samples: int = 2**20, seed: int = 0, method: str = "mc") -> IntegralEstimate:
    """Area of the ball boundary; same integrand and estimator as sphere_volume."""
    return sphere_volume(j, n_samples=n_samples, seed=seed, method=method)


def _sphere_pointwise_scalar(j: JMap, points: np.ndarray, integrand: str,
                             bianchi_flag_tol: float = 1e-5, batch: int = 1024):
    """Scalar integrand values on sphere points, chart chosen per point."""
    npts, n = points.shape
    out = np.empty(npts)
    flagged = 0
    axes = np.argmax(np.abs(points), axis=1)
    signs = np.where(points[np.arange(npts), axes] >= 0, 1, -1)
    for axis in range(n):
        for sign in (1, -1):
            mask = np.nonzero((axes == axis) & (signs == sign))[0]
            if mask.size == 0:
                continue
            chart = SphereChart(axis=axis, sign=sign, dim=n)
            fld = SphereChartField(j, chart)
            p = chart.project(points[mask])
            for lo in range(0, mask.size, batch):
                sel = mask[lo : lo + batch]
                psel = p[lo : lo + batch]
                g, ginv, _, riem, ricci, scal = curvature_arrays(fld, psel)
                if integrand == "scal":
                    out[sel] = scal
                elif integrand == "riem_sq":
                    up = np.einsum("pax,pby,pcz,pdw,pxyzw->pabcd", ginv, ginv, ginv, ginv, riem, optimize=True)
                    out[sel] = np.einsum("pabcd,pabcd->p", up, riem, optimize=True)
                elif integrand == "ric_sq":
                    up = np.einsum("pax,pby,pxy->pab", ginv, ginv, ricci, optimize=True)
                    out[sel] = np.einsum("pab,pab->p", up, ricci, optimize=True)
                else:
                    raise ValueError(f"unknown integrand {integrand!r}")
                scale = np.maximum(np.abs(riem).max(axis=(1, 2, 3, 4)), 1e-8)
                bianchi = np.abs(
                    riem + np.einsum("pacdb->pabcd", riem) + np.einsum("padbc->pabcd", riem)
                ).max(axis=(1, 2, 3, 4))
                flagged += int(np.sum(bianchi / scale > bianchi_flag_tol))
    return out, flagged


def total_scalar_curvature(
    j: JMap,
    n_samples: int = 2**18,
    seed: int = 0,
    method: str = "mc",
    integrand: str = "scal",
    experimental: bool = False,
) -> IntegralEstimate:
    """Integral of the scalar curvature over the sphere under the metric of j.

    ``integrand`` may name the higher heat-coefficient integrands
    ("riem_sq", "ric_sq"), which are exposed only behind
    ``experimental=True``: their second-derivative noise through chart
    pullbacks is too large for reliable paired separation at desk scale.
    """
    if integrand in EXPERIMENTAL_INTEGRANDS and not experimental:
        raise ValueError(f"integrand {integrand!r} requires experimental=True")
    n = j.m + 2 * j.k
    if method == "mc":
        pts = sphere_points(np.random.default_rng(seed), n, n_samples)
    elif method == "halton":
        pts = halton_sphere_points(n_samples, n, seed)
    else:
        raise ValueError(f"unknown method {method!r}")
    dens = np.empty(n_samples)
    for lo in range(0, n_samples, 65536):
        hi = min(lo + 65536, n_samples)
        dens[lo:hi] = _sphere_density(j, pts[lo:hi])
    scal, flagged = _sphere_pointwise_scalar(j, pts, integrand)
    mean, se = _batch_mean_se(scal * dens)
    area = unit_sphere_area(n - 1)
    diag = {"bianchi_flagged": flagged} if flagged else {}
    return IntegralEstimate(
        value=mean * area, std_error=se * area, n_samples=n_samples, method=method, diagnostics=diag
    )


def _reduced_region_points(rng: np.random.Generator, m: int, k: int, n: int) -> np.ndarray:
    pts = ball_points(rng, m + k, n)
    pts[:, m:] = np.abs(pts[:, m:])
    return pts


def _reduced_to_ambient(points_mk: np.ndarray, m: int, k: int) -> np.ndarray:
    """Place radii on the first coordinate of each fiber block: u_i = (r_i, 0)."""
    npts = len(points_mk)
    out = np.zeros((npts, m + 2 * k))
    out[:, :m] = points_mk[:, :m]
    out[:, m : m + 2 * k : 2] = points_mk[:, m:]
    return out


AMBIENT_INTEGRANDS = ("one", "scal", "riem_sq", "ric_sq")


def _ambient_integrand(j: JMap, points: np.ndarray, tag: str, batch: int = 2048) -> np.ndarray:
    if tag == "one":
        return np.ones(len(points))
    fld = AmbientField(j)
    out = np.empty(len(points))
    for lo in range(0, len(points), batch):
        hi = min(lo + batch, len(points))
        g, ginv, _, riem, ricci, scal = curvature_arrays(fld, points[lo:hi])
        if tag == "scal":
            out[lo:hi] = scal
        elif tag == "riem_sq":
            up = np.einsum("pax,pby,pcz,pdw,pxyzw->pabcd", ginv, ginv, ginv, ginv, riem, optimize=True)
            out[lo:hi] = np.einsum("pabcd,pabcd->p", up, riem, optimize=True)
        elif tag == "ric_sq":
            up = np.einsum("pax,pby,pxy->pab", ginv, ginv, ricci, optimize=True)
            out[lo:hi] = np.einsum("pab,pab->p", up, ricci, optimize=True)
        else:
            raise ValueError(f"unknown integrand {tag!r}")
    return out


def symmetry_reduced_integrate(
    j: JMap,
    integrand: str,
    n_samples: int = 2**16,
    seed: int = 0,
    experimental: bool = False,
    invariance_tol: float = 1e-10,
) -> IntegralEstimate:
    """Ball integral of a torus-invariant integrand over reduced coordinates.

    The fiber integration collapses to the k block radii with the
    product-of-circles weight (2 pi)^k prod r_i, cutting the sampling
    dimension from m+2k to m+k.  The integrand's invariance is spot-checked
    at torus-translated points before use.
    """
    if integrand in EXPERIMENTAL_INTEGRANDS and not experimental:
        raise ValueError(f"integrand {integrand!r} requires experimental=True")
    if integrand not in AMBIENT_INTEGRANDS:
        raise ValueError(f"unknown integrand {integrand!r}")
    m, k = j.m, j.k
    rng = np.random.default_rng(seed)
    reduced = _reduced_region_points(rng, m, k, n_samples)
    ambient = _reduced_to_ambient(reduced, m, k)

    # invariance spot check on a few sampled points
    probe = ambient[:4][np.all(reduced[:4, m:] > 1e-3, axis=1)]
    if len(probe):
        base = _ambient_integrand(j, probe, integrand)
        for zbar in np.random.default_rng(seed + 1).random((3, k)):
            moved = torus_action(zbar, probe, m)
            dev = np.max(np.abs(_ambient_integrand(j, moved, integrand) - base))
            if dev > invariance_tol * max(1.0, float(np.max(np.abs(base)))):
                raise InvariantViolationError(
                    f"integrand {integrand!r} not torus-invariant (deviation {dev:.3e})"
                )

    weight = (2 * np.pi) ** k * np.prod(reduced[:, m:], axis=1)
    vals = _ambient_integrand(j, ambient, integrand) * weight
    mean, se = _batch_mean_se(vals)
    region_volume = unit_ball_volume(m + k) / 2**k
    return IntegralEstimate(
        value=mean * region_volume,
        std_error=se * region_volume,
        n_samples=n_samples,
        method="mc-reduced",
    )


def ball_integral_full(j: JMap, integrand: str, n_samples: int = 2**16, seed: int = 0,
                       experimental: bool = False) -> IntegralEstimate:
    """Full-dimension ball integral of the same integrands (cross-check path).

    det G is identically 1, so Lebesgue sampling needs no density factor.
    """
    if integrand in EXPERIMENTAL_INTEGRANDS and not experimental:
        raise ValueError(f"integrand {integrand!r} requires experimental=True")
    n = j.m + 2 * j.k
    pts = ball_points(np.random.default_rng(seed), n, n_samples)
    vals = _ambient_integrand(j, pts, integrand)
    mean, se = _batch_mean_se(vals)
    vol = unit_ball_volume(n)
    return IntegralEstimate(value=mean * vol, std_error=se * vol, n_samples=n_samples, method="mc")


@dataclass(frozen=True)
class PairedComparison:
    """Difference of two estimates with a combined error bar."""

    invariant: str
    value_1: float
    value_2: float
    combined_se: float
    tol_sigmas: float = 3.0

    @property
    def difference(self) -> float:
        return self.value_1 - self.value_2

    @property
    def sigmas(self) -> float:
        if self.combined_se == 0.0:
            return 0.0 if self.difference == 0.0 else float("inf")
        return abs(self.difference) / self.combined_se

    @property
    def consistent(self) -> bool:
        return self.sigmas <= self.tol_sigmas

    def to_dict(self) -> dict:
        return {
            "invariant": self.invariant,
            "value_1": self.value_1,
            "value_2": self.value_2,
            "difference": self.difference,
            "combined_se": self.combined_se,
            "sigmas": self.sigmas,
            "tol_sigmas": self.tol_sigmas,
            "consistent": self.consistent,
        }


def paired_comparison(invariant: str, est1: IntegralEstimate, est2: IntegralEstimate,
                      tol_sigmas: float = 3.0) -> PairedComparison:
    combined = float(np.hypot(est1.std_error, est2.std_error))
    return PairedComparison(
        invariant=invariant,
        value_1=est1.value,
        value_2=est2.value,
        combined_se=combined,
        tol_sigmas=tol_sigmas,
    )
