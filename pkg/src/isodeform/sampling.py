"""Seeded point samplers shared by the integral and scan pipelines."""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .forms import _halton_matrix


def sphere_points(rng: np.random.Generator, dim: int, n: int) -> np.ndarray:
    """Uniform points on the unit sphere S^{dim-1} (normalized Gaussians)."""
    pts = rng.standard_normal((n, dim))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def ball_points(rng: np.random.Generator, dim: int, n: int) -> np.ndarray:
    """Uniform points in the unit ball (direction times radius^(1/dim))."""
    direction = sphere_points(rng, dim, n)
    radius = rng.random(n) ** (1.0 / dim)
    return direction * radius[:, None]


def halton_unit(n: int, dim: int, seed: int) -> np.ndarray:
    """Randomized Halton points in [0,1)^dim via a seeded digital shift."""
    shift = np.random.default_rng(seed).random(dim)
    return (_halton_matrix(dim, n + 1)[1:] + shift) % 1.0


def halton_sphere_points(n: int, dim: int, seed: int) -> np.ndarray:
    """Low-discrepancy sphere sample: shifted Halton through the normal CDF."""
    u = np.clip(halton_unit(n, dim, seed), 1e-12, 1 - 1e-12)
    pts = ndtri(u)
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def halton_ball_points(n: int, dim: int, seed: int) -> np.ndarray:
    u = np.clip(halton_unit(n, dim + 1, seed), 1e-12, 1 - 1e-12)
    pts = ndtri(u[:, :dim])
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    return pts * (u[:, dim] ** (1.0 / dim))[:, None]


def principal_orbit_mask(points: np.ndarray, m: int, min_radius: float = 1e-3) -> np.ndarray:
    """True where every fiber block radius |u_i| stays away from zero."""
    u = points[:, m:]
    radii = np.linalg.norm(u.reshape(len(points), -1, 2), axis=2)
    return np.all(radii >= min_radius, axis=1)


def principal_sphere_points(rng: np.random.Generator, m: int, k: int, n: int,
                            min_radius: float = 1e-3) -> np.ndarray:
    """Sphere points on principal orbits (all block radii >= min_radius)."""
    dim = m + 2 * k
    out = np.empty((0, dim))
    while len(out) < n:
        cand = sphere_points(rng, dim, max(2 * n, 64))
        out = np.vstack([out, cand[principal_orbit_mask(cand, m, min_radius)]])
    return out[:n]


def principal_ball_points(rng: np.random.Generator, m: int, k: int, n: int,
                          min_radius: float = 1e-3) -> np.ndarray:
    dim = m + 2 * k
    out = np.empty((0, dim))
    while len(out) < n:
        cand = ball_points(rng, dim, max(2 * n, 64))
        out = np.vstack([out, cand[principal_orbit_mask(cand, m, min_radius)]])
    return out[:n]
