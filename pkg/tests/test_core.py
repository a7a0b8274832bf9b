import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm, logm

from blochgeom.core import (
    LOG2,
    BlochVector,
    DensityMatrix,
    OutOfBallError,
    SingularLogarithmError,
    artanh_ratio,
    eigenvalues,
    entropy,
    from_bloch,
    log_density,
    potential,
    spectral,
    to_bloch,
)
from blochgeom.sampling import random_ball, random_sphere

X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]])
Z = np.diag([1.0 + 0j, -1.0])

coord = st.floats(-1, 1, allow_nan=False)
ball_point = st.tuples(coord, coord, coord).filter(lambda p: sum(c * c for c in p) <= 1.0)


def pauli_rho(v):
    x, y, z = v
    return 0.5 * (np.eye(2) + x * X + y * Y + z * Z)


def test_from_bloch_matches_pauli_expansion(rng):
    for v in random_ball(200, rng):
        assert np.allclose(from_bloch(v).matrix, pauli_rho(v), atol=1e-15)


@given(ball_point)
def test_bloch_round_trip(p):
    back = to_bloch(from_bloch(p))
    assert np.allclose(back.array, p, atol=1e-15)


def test_out_of_ball_rejected():
    with pytest.raises(OutOfBallError):
        BlochVector(1.0, 1.0, 0.0)
    with pytest.raises(OutOfBallError):
        from_bloch([0, 0, 1.01])
    # tolerance of the closed ball
    BlochVector(0.0, 0.0, 1.0 + 1e-13)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[1, 0.1], [0.2, 0]]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.6, 0.6]))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.5, -0.5]))


def test_eigenvalues_match_numerical(rng):
    for v in random_ball(200, rng):
        l1, l2 = eigenvalues(v)
        ref = np.linalg.eigvalsh(pauli_rho(v))
        assert np.allclose([l2, l1], ref, atol=1e-15)


@pytest.mark.parametrize(
    "v",
    [(0.3, -0.4, 0.5), (0, 0, 0.7), (0, 0, -0.7), (0, 0, 1), (0, 0, -1), (1e-9, 0, -1.0 + 1e-18),
     (-0.6, 0.8, 0.0), (0.0, 0.0, 0.0)],
)
def test_spectral_unitary_and_reconstruction(v):
    sd = spectral(v)
    u = sd.unitary
    assert np.allclose(u.conj().T @ u, np.eye(2), atol=1e-14)
    assert np.allclose(sd.reconstruct(), pauli_rho(v), atol=1e-14)
    assert sd.lambda1 >= sd.lambda2
    p1, p2 = sd.projectors
    assert np.allclose(p1 + p2, np.eye(2), atol=1e-14)


def test_spectral_first_column_is_plus_eigenvector(rng):
    for v in random_ball(100, rng):
        sd = spectral(v)
        rho = pauli_rho(v)
        assert np.allclose(rho @ sd.unitary[:, 0], sd.lambda1 * sd.unitary[:, 0], atol=1e-14)


def test_degenerate_center():
    sd = spectral([0, 0, 0])
    assert sd.degenerate and sd.lambda1 == sd.lambda2 == 0.5


def test_log_density_matches_scipy(rng):
    for v in random_ball(200, rng, rmax=0.999):
        assert np.allclose(log_density(v), logm(pauli_rho(v)), atol=1e-10)
        assert np.allclose(expm(log_density(v)), pauli_rho(v), atol=1e-12)


def test_log_density_rejects_pure():
    with pytest.raises(SingularLogarithmError):
        log_density([0, 0, 1])
    with pytest.raises(SingularLogarithmError):
        log_density([0, 0, 1 - 1e-13])
    log_density([0, 0, 1 - 1e-11])


def test_artanh_ratio_series_is_continuous():
    r = np.array([1e-4 * (1 - 1e-12), 1e-4 * (1 + 1e-12)])
    a = artanh_ratio(r)
    assert abs(a[0] - a[1]) < 1e-15
    assert artanh_ratio(0.0) == 1.0
    assert math.isclose(artanh_ratio(0.5), math.atanh(0.5) / 0.5, rel_tol=1e-15)


def test_entropy_against_eigenvalues(rng):
    v = random_ball(500, rng)
    lam = np.linalg.eigvalsh(np.array([pauli_rho(p) for p in v]))
    with np.errstate(divide="ignore", invalid="ignore"):
        ref = -np.sum(np.where(lam > 0, lam * np.log(np.where(lam > 0, lam, 1)), 0), axis=1)
    assert np.allclose(entropy(v), ref, atol=1e-12)


def test_entropy_extremes(rng):
    assert entropy([0, 0, 0]) == pytest.approx(LOG2, abs=1e-15)
    assert np.all(entropy(random_sphere(100, rng)) < 1e-13)
    assert entropy([0, 0, 1]) == 0.0
    assert potential([0, 0, 0]) == pytest.approx(-LOG2, abs=1e-15)


@settings(max_examples=200)
@given(ball_point, ball_point, st.floats(0, 1))
def test_potential_convex(a, b, t):
    a, b = np.array(a), np.array(b)
    lhs = potential(t * a + (1 - t) * b)
    assert lhs <= t * potential(a) + (1 - t) * potential(b) + 1e-12
