import json

import numpy as np
import pytest
from scipy.optimize import minimize

from blochgeom import channels as ch
from blochgeom.sampling import random_ball, random_sphere


@pytest.mark.parametrize("diag", [(0.2, 0.5, 0.9), (1.0, 0.3, 0.3), (0.0, 0.0, 0.0), (1.2, 0.1, 0.1), (0.4, -1.5, 0.2)])
def test_overflow_of_axis_aligned_ellipsoid(diag):
    # semi-axes |d_k| give max |M v| = max |d_k|
    assert ch.validate_image(np.diag(diag)) == pytest.approx(max(map(abs, diag)) - 1.0, abs=1e-12)


def test_overflow_of_rotated_ellipsoid(rng):
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    m = q @ np.diag([0.9, 0.4, 0.1]) @ q.T
    assert ch.validate_image(m) == pytest.approx(-0.1, abs=1e-12)


def test_overflow_with_offset_against_constrained_optimiser(rng):
    m = np.array([[0.5, 0.1, 0.0], [0.0, 0.3, 0.2], [0.1, 0.0, 0.4]])
    b = np.array([0.2, -0.3, 0.1])
    best = -np.inf
    for v0 in random_sphere(30, rng):
        res = minimize(lambda v: -np.sum((m @ v + b) ** 2), v0, method="SLSQP",
                       constraints={"type": "eq", "fun": lambda v: v @ v - 1.0},
                       options={"ftol": 1e-15, "maxiter": 500})
        best = max(best, np.sqrt(-res.fun))
    assert ch.validate_image(m, b) == pytest.approx(best - 1.0, abs=1e-9)


def test_translated_identity_rejected_with_overflow():
    with pytest.raises(ch.InvalidChannelError) as info:
        ch.AffineChannel(np.eye(3), [0.1, 0.0, 0.0])
    assert info.value.overflow == pytest.approx(0.1, abs=1e-12)
    assert "1.000e-01" in str(info.value)


def test_shape_and_finiteness_checks():
    with pytest.raises(ch.InvalidChannelError):
        ch.AffineChannel(np.eye(2))
    with pytest.raises(ch.InvalidChannelError):
        ch.AffineChannel(np.full((3, 3), np.nan))


@pytest.mark.parametrize(
    "channel",
    [ch.identity(), ch.depolarizing(0.3), ch.planar(0.8, 0.2), ch.amplitude_damping(0.25),
     ch.phase_damping(0.6), ch.rotation([0, 1, 1], 2.0)],
    ids=lambda c: c.label,
)
def test_builders_stay_in_ball(channel, rng):
    out = channel(random_sphere(5000, rng))
    assert np.linalg.norm(out, axis=1).max() <= 1 + 1e-12
    assert ch.validate_image(channel) <= 1e-9


def test_amplitude_damping_fixes_ground_state():
    c = ch.amplitude_damping(0.7)
    assert np.allclose(c([0, 0, 1]), [0, 0, 1])
    assert np.allclose(c([0, 0, -1]), [0, 0, 2 * 0.7 - 1])
    assert np.allclose(ch.amplitude_damping(1.0)(random_ball(5, np.random.default_rng(0))), [0, 0, 1])


def test_phase_damping_keeps_z():
    c = ch.phase_damping(0.5)
    v = np.array([0.6, 0.0, 0.8])
    assert np.allclose(c(v), [0.6 * np.sqrt(0.5), 0.0, 0.8])


def test_rotation_matches_rodrigues():
    c = ch.rotation([0, 0, 1], np.pi / 2)
    assert np.allclose(c([1, 0, 0]), [0, 1, 0], atol=1e-15)
    assert np.allclose(c.matrix @ c.matrix.T, np.eye(3), atol=1e-15)
    assert np.linalg.det(c.matrix) == pytest.approx(1.0)


def test_affinity(rng):
    c = ch.AffineChannel(np.diag([0.5, 0.4, 0.3]), [0.1, 0.2, -0.1])
    a, b = random_ball(100, rng), random_ball(100, rng)
    t = rng.random((100, 1))
    assert np.allclose(c(t * a + (1 - t) * b), t * c(a) + (1 - t) * c(b), atol=1e-15)


@pytest.mark.parametrize("bad", [dict(name="depolarizing", t=1.5), dict(name="planar", tx=0.5),
                                 dict(name="nope"), dict(name="amplitude_damping", gamma=-0.1)])
def test_build_errors(bad):
    name = bad.pop("name")
    with pytest.raises(ch.InvalidChannelError) as info:
        ch.build(name, **bad)
    assert info.value.overflow is None


def test_build_names():
    assert ch.build("phase-damping", **{"lambda": 0.5}).label == ch.phase_damping(0.5).label
    r = ch.build("rotation", axis="0,0,1", angle=np.pi)
    assert np.allclose(r([1, 0, 0]), [-1, 0, 0], atol=1e-15)


def test_json_round_trip(tmp_path):
    c = ch.AffineChannel(np.diag([0.5, 0.4, 0.3]), [0.1, 0.2, -0.1], "custom")
    path = tmp_path / "c.json"
    ch.save_channel(c, path)
    d = ch.load_channel(path)
    assert np.array_equal(d.matrix, c.matrix) and np.array_equal(d.offset, c.offset)
    assert d.label == "custom"
    raw = json.loads(path.read_text())
    assert raw["matrix"][0] == [0.5, 0.0, 0.0]


def test_json_missing_offset_defaults_to_zero():
    c = ch.AffineChannel.from_dict({"matrix": np.eye(3).tolist()})
    assert np.array_equal(c.offset, np.zeros(3))
    with pytest.raises(ch.InvalidChannelError):
        ch.AffineChannel.from_dict({"offset": [0, 0, 0]})


def test_channel_is_immutable():
    c = ch.identity()
    with pytest.raises(ValueError):
        c.matrix[0, 0] = 2.0


def test_shrunk_translated_identity_overflow():
    assert ch.validate_image(0.5 * np.eye(3), [0.4, 0, 0]) == pytest.approx(-0.1, abs=1e-12)
    assert ch.validate_image(np.eye(3)) == pytest.approx(0.0, abs=1e-15)


def test_depolarizing_one_is_identity():
    assert np.array_equal(ch.depolarizing(1.0).matrix, ch.identity().matrix)
