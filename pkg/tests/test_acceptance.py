"""Acceptance criteria 1-10.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in the
pytest terminal summary.  Run directly with ``python3 tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from blochgeom import channels as ch
from blochgeom.capacity import channel_image, holevo_capacity, meb_exact, meb_grid, meb_iterative
from blochgeom.core import LOG2, potential
from blochgeom.geometry import (
    bures,
    conjugate_potential,
    divergence_closed,
    divergence_matrix,
    euclidean,
    fubini_study,
    grad_potential,
    inverse_grad,
)
from blochgeom.sampling import random_ball, random_sphere
from blochgeom.verify import asymmetry_witness
from blochgeom.voronoi import AMBIGUITY, DiagramMode, assign, diagrams_equal, pure_limit_section

SEED = 12345
PURE4 = (DiagramMode.FUBINI_STUDY, DiagramMode.BURES, DiagramMode.GEODESIC, DiagramMode.EUCLIDEAN_SECTION)


def binary_entropy(p):
    return -sum(q * math.log(q) for q in (p, 1 - p) if q > 0)


@pytest.fixture(scope="module")
def site_sets():
    rng = np.random.default_rng(SEED)
    sets = [random_sphere(int(rng.integers(2, 21)), rng) for _ in range(100)]
    queries = random_sphere(10_000, rng)
    return sets, queries


def test_c01_lemma_agreement(report):
    rng = np.random.default_rng(SEED + 1)
    a = random_ball(10_000, rng, rmax=1.0)
    b = random_ball(10_000, rng, rmax=0.999)
    t0 = time.perf_counter()
    err = float(np.max(np.abs(divergence_closed(a, b) - divergence_matrix(a, b))))
    dt = time.perf_counter() - t0
    ok = err <= 1e-10 and dt < 5.0
    report(1, "closed form vs matrix divergence", ok, f"max|diff|={err:.2e} (<=1e-10) in {dt:.2f}s (<5s)")
    assert ok


def test_c02_origin_limit(report):
    radii = 10.0 ** -np.arange(1, 11)
    d = np.array([0.3, -0.5, 0.8]) / np.linalg.norm([0.3, -0.5, 0.8])
    vals = np.array([divergence_closed([0, 0, 1], r * d) for r in radii])
    gaps = np.abs(vals - LOG2)
    ok = gaps[-1] <= 1e-8 and bool(np.all(np.diff(gaps) <= 1e-15))
    report(2, "D((0,0,1) || b) -> log 2", ok, f"final |D - log2|={gaps[-1]:.2e} (<=1e-8), gaps shrink monotonically")
    assert ok


def test_c03_pure_modes_coincide(site_sets, report):
    sets, q = site_sets
    t0 = time.perf_counter()
    bad = 0
    for sites in sets:
        res = [assign(m, sites, q) for m in PURE4]
        for r in res[1:]:
            bad += len(diagrams_equal(res[0], r, AMBIGUITY)[1])
    dt = time.perf_counter() - t0
    ok = bad == 0 and dt < 60.0
    report(3, "four pure-state diagrams coincide", ok,
           f"{bad} disagreements over 100 sets x 10^4 queries in {dt:.1f}s (<60s)")
    assert ok


def test_c04_pure_limit_sections(site_sets, report):
    sets, q = site_sets
    bad = {}
    for eps in (1e-1, 1e-2, 1e-4, 1e-6):
        for mode in (DiagramMode.DIVERGENCE_PRIMAL, DiagramMode.DIVERGENCE_DUAL):
            n = 0
            for sites in sets:
                ref = assign(DiagramMode.GEODESIC, sites, q)
                n += len(diagrams_equal(ref, pure_limit_section(sites, eps, mode, q), AMBIGUITY)[1])
            bad[(eps, mode.value)] = n
    total = sum(bad.values())
    ok = total == 0
    report(4, "pure-limit divergence diagrams match geodesic", ok,
           f"{total} disagreements over eps in {{1e-1,1e-2,1e-4,1e-6}} x both modes")
    assert ok


def test_c05_asymmetry_witness(report):
    w = asymmetry_witness(np.random.default_rng(SEED))
    ok = w is not None and w[1] != w[2] and min(w[3], w[4]) > 1e-6
    if w is None:
        detail = "no witness"
    else:
        q, i, j, mi, mj = w
        # independent recheck of both classifications
        from blochgeom.verify import WITNESS_SITES as S

        dp = divergence_closed(q, S)
        dd = divergence_closed(S, q)
        ok = ok and int(np.argmin(dp)) == i and int(np.argmin(dd)) == j
        detail = f"query {np.round(q, 4).tolist()} primal->{i} (margin {mi:.3g}), dual->{j} (margin {mj:.3g})"
    report(5, "primal and dual mixed diagrams differ", ok, detail)
    assert ok


@pytest.mark.parametrize("t", [0.25, 0.5, 0.75])
def test_c06_depolarizing_capacity(t, report):
    c = ch.depolarizing(t)
    t0 = time.perf_counter()
    rep = holevo_capacity(c, 2000)
    dt = time.perf_counter() - t0
    oracle = LOG2 - binary_entropy((1 + t) / 2)
    err = abs(rep.capacity_nats - oracle)
    # grid search over centers as an independent check of the same ball
    grid = meb_grid(channel_image(c, 2000), resolution=12, restarts=2)
    gerr = abs(grid.radius - oracle)
    ok = err <= 1e-4 and dt < 10.0 and gerr <= 1e-4
    report(6, f"depolarizing t={t} capacity", ok,
           f"|C - oracle|={err:.2e} (<=1e-4), grid |C - oracle|={gerr:.2e}, {dt:.2f}s (<10s)")
    assert ok


def test_c07_identity_capacity(report):
    rep = holevo_capacity(ch.identity(), 4000)
    c = rep.capacity_nats
    ok = LOG2 - 1e-3 <= c <= LOG2 + 1e-6
    report(7, "identity channel capacity", ok, f"C={c:.12f}, log2 - C = {LOG2 - c:.2e} (in [-1e-6, 1e-3])")
    assert ok


def test_c08_solver_triangle(report):
    rng = np.random.default_rng(SEED + 8)
    worst_it, worst_low, worst_gap = 0.0, -np.inf, 0.0
    for _ in range(50):
        pts = random_ball(int(rng.integers(1, 13)), rng)
        e, it, g = meb_exact(pts), meb_iterative(pts), meb_grid(pts)
        worst_it = max(worst_it, abs(e.radius - it.radius))
        worst_low = max(worst_low, e.radius - 1e-12 - g.radius)
        worst_gap = max(worst_gap, g.radius - e.radius)
    ok = worst_it <= 1e-6 and worst_low <= 0.0 and worst_gap <= 1e-4
    report(8, "exact / iterative / grid radii", ok,
           f"max|exact-iter|={worst_it:.2e} (<=1e-6), max(grid-exact)={worst_gap:.2e} (<=1e-4), grid never below exact")
    assert ok


def test_c09_duality(report):
    rng = np.random.default_rng(SEED + 9)
    v = random_ball(1000, rng, rmax=0.999)
    u = grad_potential(v)
    fenchel = float(np.max(np.abs(potential(v) + conjugate_potential(u) - np.sum(v * u, axis=-1))))
    trip = float(np.max(np.abs(inverse_grad(u) - v)))
    w = random_ball(1000, rng, rmax=0.99)
    h = 1e-5
    num = np.stack([(potential(w + h * e) - potential(w - h * e)) / (2 * h) for e in np.eye(3)], axis=-1)
    gw = grad_potential(w)
    rel = float(np.max(np.linalg.norm(num - gw, axis=-1) / np.maximum(np.linalg.norm(gw, axis=-1), 1e-3)))
    ok = fenchel <= 1e-10 and trip <= 1e-10 and rel <= 1e-6
    report(9, "duality identities", ok,
           f"Fenchel {fenchel:.2e}, round trip {trip:.2e} (<=1e-10), finite-difference rel {rel:.2e} (<=1e-6)")
    assert ok


def test_c10_pure_distances(report):
    rng = np.random.default_rng(SEED + 10)
    a, b = random_sphere(1000, rng), random_sphere(1000, rng)
    theta = np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))
    e_fs = float(np.max(np.abs(fubini_study(a, b) - theta / 2)))
    e_b = float(np.max(np.abs(bures(a, b) - euclidean(a, b) / 2)))
    ok = e_fs <= 1e-12 and e_b <= 1e-12
    report(10, "pure-state distance identities", ok, f"|d_FS - theta/2|={e_fs:.2e}, |d_B - d_E/2|={e_b:.2e} (<=1e-12)")
    assert ok


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
