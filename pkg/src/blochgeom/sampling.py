"""Deterministic and seeded point sets on the Bloch sphere and ball."""
from __future__ import annotations

import math

import numpy as np
from scipy.spatial.transform import Rotation

from .core import radius


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` points of the golden-angle spiral lattice on the unit sphere."""
    if n < 1:
        raise ValueError("need at least one point")
    i = np.arange(n, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / n
    rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    pts = np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)
    return pts / radius(pts)[:, None]


def sample_sphere(n: int, seed=None) -> np.ndarray:
    """Fibonacci lattice of ``n`` pure states, randomly rotated by ``seed``.

    ``seed=None`` returns the unrotated lattice.  The output is a pure
    function of ``(n, seed)``.
    """
    pts = fibonacci_sphere(n)
    if seed is None:
        return pts
    rot = Rotation.random(random_state=np.random.default_rng(seed)).as_matrix()
    pts = pts @ rot.T
    return pts / radius(pts)[:, None]


def random_sphere(n: int, rng) -> np.ndarray:
    v = rng.normal(size=(n, 3))
    return v / radius(v)[:, None]


def random_ball(n: int, rng, rmax: float = 1.0) -> np.ndarray:
    """Uniform points in the ball of radius ``rmax``."""
    return random_sphere(n, rng) * (rmax * rng.random(n) ** (1.0 / 3.0))[:, None]


def random_rotation(rng) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def ball_grid(n: int = 41, rmax: float = 0.999) -> np.ndarray:
    """Cubic ``n^3`` grid over ``[-1, 1]^3`` clipped to radius ``rmax``."""
    t = np.linspace(-1.0, 1.0, n)
    g = np.stack(np.meshgrid(t, t, t, indexing="ij"), axis=-1).reshape(-1, 3)
    return g[radius(g) <= rmax]
