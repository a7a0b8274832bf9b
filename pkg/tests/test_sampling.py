import numpy as np
import pytest
from scipy.spatial import cKDTree

from blochgeom.sampling import ball_grid, fibonacci_sphere, random_ball, sample_sphere


def test_single_point():
    p = sample_sphere(1)
    assert p.shape == (1, 3) and np.linalg.norm(p[0]) == pytest.approx(1.0, abs=1e-15)


def test_points_on_sphere():
    for seed in (None, 0, 7):
        assert np.allclose(np.linalg.norm(sample_sphere(1000, seed), axis=1), 1.0, atol=1e-14)


def test_deterministic_per_seed():
    assert np.array_equal(sample_sphere(500, 3), sample_sphere(500, 3))
    assert not np.array_equal(sample_sphere(500, 3), sample_sphere(500, 4))


def test_nearest_neighbour_gap_shrinks_like_inverse_sqrt():
    # largest distance from a probe to the nearest lattice point, times sqrt(n)
    probes = fibonacci_sphere(200_000)
    scaled = []
    for n in (100, 400, 1600, 6400):
        gap, _ = cKDTree(sample_sphere(n, 1)).query(probes)
        scaled.append(gap.max() * np.sqrt(n))
    assert max(scaled) / min(scaled) < 1.5


def test_rejects_empty():
    with pytest.raises(ValueError):
        fibonacci_sphere(0)


def test_ball_grid_clip():
    g = ball_grid(41, 0.999)
    assert np.linalg.norm(g, axis=1).max() <= 0.999
    assert len(g) < 41 ** 3


def test_random_ball_radius(rng):
    p = random_ball(1000, rng, rmax=0.5)
    assert np.linalg.norm(p, axis=1).max() <= 0.5
