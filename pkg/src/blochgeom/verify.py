"""
Executable checks of the library's identities and equivalence claims.

Each suite returns a list of :class:`Check` rows; :func:`run` collects the
requested suites with a fixed seed.  The command-line ``verify`` subcommand
prints these rows.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import channels as ch
from .capacity import holevo_capacity, meb_exact, meb_grid, meb_iterative
from .core import LOG2, density_matrices, entropy, from_bloch, log_density, potential, radius, spectral, to_bloch
from .geometry import (
    bures,
    conjugate_potential,
    divergence_closed,
    divergence_dual,
    divergence_matrix,
    euclidean,
    fubini_study,
    geodesic,
    grad_potential,
    inverse_grad,
)
from .sampling import random_ball, random_rotation, random_sphere
from .voronoi import (
    AMBIGUITY,
    DiagramMode,
    assign,
    bisector,
    diagrams_equal,
    pure_limit_section,
)


@dataclass
class Check:
    suite: str
    name: str
    samples: int
    max_error: float
    tolerance: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0


@dataclass
class _Suite:
    name: str
    rows: list = field(default_factory=list)

    def add(self, name, samples, err, tol, detail="", passed=None):
        err = float(err)
        ok = (err <= tol) if passed is None else bool(passed)
        self.rows.append(Check(self.name, name, int(samples), err, tol, ok, detail))


def suite_core(rng):
    s = _Suite("core")
    v = random_ball(10_000, rng)
    back = np.array([to_bloch(from_bloch(p)).array for p in v[:2000]])
    s.add("bloch round trip", 2000, np.abs(back - v[:2000]).max(), 1e-14)
    errs = [np.abs(spectral(p).reconstruct() - density_matrices(p)).max() for p in v[:2000]]
    s.add("spectral reconstruction", 2000, max(errs), 1e-12)
    w = v[radius(v) <= 0.999][:1000]
    logs = log_density(w)
    errs = [np.abs(expm(logs[k]) - density_matrices(w[k])).max() for k in range(len(w))]
    s.add("exp(log rho) = rho", len(w), max(errs), 1e-10)
    a, b = random_ball(10_000, rng), random_ball(10_000, rng)
    mid = entropy((a + b) / 2) - 0.5 * (entropy(a) + entropy(b))
    s.add("entropy midpoint concavity", len(a), max(0.0, -mid.min()), 1e-12)
    rot = random_rotation(rng)
    s.add("potential rotation invariance", len(v), np.abs(potential(v) - potential(v @ rot.T)).max(), 1e-14)
    return s.rows


def suite_lemma(rng):
    s = _Suite("lemma")
    a = random_ball(10_000, rng)
    b = random_ball(10_000, rng, rmax=0.999)
    err = np.abs(divergence_closed(a, b) - divergence_matrix(a, b)).max()
    s.add("closed form = matrix divergence", len(a), err, 1e-10)
    return s.rows


def suite_origin(rng):
    s = _Suite("origin")
    d = rng.normal(size=3)
    d /= np.linalg.norm(d)
    radii = 10.0 ** -np.arange(1, 11)
    vals = [divergence_closed([0, 0, 1], r * d) for r in radii]
    gaps = np.abs(np.array(vals) - LOG2)
    s.add("D(pure || b) -> log 2 as b -> 0", len(radii), gaps[-1], 1e-8,
          passed=gaps[-1] <= 1e-8 and gaps[-1] <= gaps[0])
    return s.rows


def suite_duality(rng):
    s = _Suite("duality")
    v = random_ball(1000, rng, rmax=0.999)
    u = grad_potential(v)
    s.add("Fenchel equality", len(v), np.abs(potential(v) + conjugate_potential(u) - np.sum(v * u, -1)).max(), 1e-10)
    s.add("grad / inverse round trip", len(v), np.abs(inverse_grad(u) - v).max(), 1e-10)
    h = 1e-5
    num = np.stack([(potential(v + h * e) - potential(v - h * e)) / (2 * h) for e in np.eye(3)], -1)
    w = radius(v) < 0.99  # finite differences need room to the sphere
    rel = np.linalg.norm(num[w] - u[w], axis=-1) / np.maximum(np.linalg.norm(u[w], axis=-1), 1e-3)
    s.add("gradient vs finite differences", int(w.sum()), rel.max(), 1e-6)
    a = random_ball(1000, rng)
    s.add("dual-form divergence", len(a), np.abs(divergence_dual(a, u) - divergence_closed(a, v)).max(), 1e-10)
    return s.rows


def suite_distances(rng):
    s = _Suite("distances")
    a, b = random_sphere(1000, rng), random_sphere(1000, rng)
    theta = np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, -1))
    s.add("d_FS = theta / 2", len(a), np.abs(fubini_study(a, b) - theta / 2).max(), 1e-12)
    s.add("d_B = d_E / 2", len(a), np.abs(bures(a, b) - euclidean(a, b) / 2).max(), 1e-12)
    s.add("geodesic = 2 d_FS", len(a), np.abs(geodesic(a, b) - 2 * fubini_study(a, b)).max(), 1e-12)
    orders = [np.argsort(f(a, b), kind="stable") for f in (fubini_study, bures, geodesic, euclidean)]
    same = all(np.array_equal(orders[0], o) for o in orders[1:])
    s.add("distances order pairs identically", len(a), 0.0 if same else 1.0, 0.0)
    return s.rows


def suite_channels(rng):
    s = _Suite("channels")
    built = [ch.identity(), ch.depolarizing(0.5), ch.planar(0.5, 0.25), ch.amplitude_damping(0.3),
             ch.phase_damping(0.5), ch.rotation([1, 2, 3], 0.9)]
    worst = max(ch.validate_image(c) for c in built)
    s.add("builders keep image in ball", len(built), max(worst, 0.0), 1e-9)
    s.add("translated identity overflows by 0.1", 1,
          abs(ch.validate_image(np.eye(3), [0.1, 0, 0]) - 0.1), 1e-12)
    a, b = random_ball(1000, rng), random_ball(1000, rng)
    lam = rng.random((1000, 1))
    c = ch.amplitude_damping(0.3)
    err = np.abs(ch.apply(c, lam * a + (1 - lam) * b) - (lam * ch.apply(c, a) + (1 - lam) * ch.apply(c, b))).max()
    s.add("affinity", 1000, err, 1e-14)
    r = ch.rotation(rng.normal(size=3), 1.3)
    err = np.abs(euclidean(ch.apply(r, a), ch.apply(r, b)) - euclidean(a, b)).max()
    s.add("rotation isometry", 1000, err, 1e-12)
    return s.rows


def random_site_sets(rng, count=100, lo=2, hi=20):
    return [random_sphere(int(rng.integers(lo, hi + 1)), rng) for _ in range(count)]


def suite_pure_modes(rng, n_sets=100, n_queries=10_000):
    s = _Suite("pure-modes")
    q = random_sphere(n_queries, rng)
    bad = 0
    for sites in random_site_sets(rng, n_sets):
        ref = assign(DiagramMode.GEODESIC, sites, q)
        for mode in (DiagramMode.FUBINI_STUDY, DiagramMode.BURES, DiagramMode.EUCLIDEAN_SECTION):
            ok, rep = diagrams_equal(ref, assign(mode, sites, q))
            bad += len(rep)
    s.add("FS / Bures / geodesic / Euclidean diagrams coincide", n_sets * n_queries, bad, 0)
    return s.rows


def suite_pure_limit(rng, n_sets=100, n_queries=10_000):
    s = _Suite("pure-limit")
    q = random_sphere(n_queries, rng)
    eps_list = (1e-1, 1e-2, 1e-4, 1e-6)
    bad = {e: 0 for e in eps_list}
    for sites in random_site_sets(rng, n_sets):
        ref = assign(DiagramMode.GEODESIC, sites, q)
        for e in eps_list:
            for mode in (DiagramMode.DIVERGENCE_PRIMAL, DiagramMode.DIVERGENCE_DUAL):
                ok, rep = diagrams_equal(ref, pure_limit_section(sites, e, mode, q))
                bad[e] += len(rep)
    for e in eps_list:
        s.add(f"limit sections at eps={e:g} match geodesic", n_sets * n_queries * 2, bad[e], 0)
    return s.rows


WITNESS_SITES = np.array([[0.0, 0.0, 0.1], [0.0, 0.0, 0.9], [0.6, 0.0, -0.3]])


def asymmetry_witness(rng, sites=WITNESS_SITES, n=20_000, min_margin=1e-6):
    """A query that the primal and dual divergence diagrams assign differently."""
    q = random_ball(n, rng, rmax=0.99)
    a = assign(DiagramMode.DIVERGENCE_PRIMAL, sites, q)
    b = assign(DiagramMode.DIVERGENCE_DUAL, sites, q)
    hit = np.nonzero((a.sites != b.sites) & (a.margins > min_margin) & (b.margins > min_margin))[0]
    if len(hit) == 0:
        return None
    k = hit[np.argmax(np.minimum(a.margins[hit], b.margins[hit]))]
    return q[k], int(a.sites[k]), int(b.sites[k]), float(a.margins[k]), float(b.margins[k])


def suite_asymmetry(rng):
    s = _Suite("asymmetry")
    w = asymmetry_witness(rng)
    if w is None:
        s.add("primal and dual mixed diagrams differ", 20_000, 1.0, 0.0, "no witness found")
    else:
        p, i, j, ma, mb = w
        detail = (f"sites={WITNESS_SITES.tolist()} query=({p[0]:.6f},{p[1]:.6f},{p[2]:.6f}) "
                  f"primal->{i} (margin {ma:.3g}) dual->{j} (margin {mb:.3g})")
        s.add("primal and dual mixed diagrams differ", 20_000, 0.0, 0.0, detail)
    return s.rows


def suite_bisectors(rng):
    s = _Suite("bisectors")
    bad = 0
    total = 0
    for mode in DiagramMode:
        for _ in range(10):
            if mode.pure_only or mode is DiagramMode.EUCLIDEAN_SECTION:
                si, sj = random_sphere(2, rng)
                p = random_sphere(1000, rng)
            else:
                si, sj = random_ball(2, rng, rmax=0.95)
                p = random_ball(1000, rng, rmax=0.99)
            bis = bisector(mode, si, sj)
            a = assign(mode, [si, sj], p)
            side = bis.side(p)
            clear = (a.margins >= AMBIGUITY) & (np.abs(side) > 1e-9)
            bad += int(np.sum(clear & ((side <= 0) != (a.sites == 0))))
            total += len(p)
    s.add("bisector halfspace predicts pairwise winner", total, bad, 0)
    return s.rows


def suite_solvers(rng, n_instances=50, grid_instances=10):
    s = _Suite("solvers")
    worst_it, worst_grid_low, worst_grid_gap = 0.0, 0.0, 0.0
    for k in range(n_instances):
        pts = random_ball(int(rng.integers(1, 13)), rng)
        e, it = meb_exact(pts), meb_iterative(pts)
        worst_it = max(worst_it, abs(e.radius - it.radius))
        if k < grid_instances:
            g = meb_grid(pts)
            worst_grid_low = max(worst_grid_low, e.radius - 1e-12 - g.radius)
            worst_grid_gap = max(worst_grid_gap, g.radius - e.radius)
    s.add("exact = iterative radius", n_instances, worst_it, 1e-6)
    s.add("grid radius >= exact radius", grid_instances, max(worst_grid_low, 0.0), 0.0)
    s.add("grid radius within 1e-4 of exact", grid_instances, worst_grid_gap, 1e-4)
    return s.rows


def suite_capacity(rng):
    s = _Suite("capacity")
    seed = int(rng.integers(0, 2**31))
    worst = 0.0
    for t in (0.25, 0.5, 0.75):
        rep = holevo_capacity(ch.depolarizing(t), 2000, seed=seed)
        worst = max(worst, abs(rep.capacity_nats - (LOG2 - entropy([0, 0, t]))))
    s.add("depolarizing capacity = log 2 - S", 3, worst, 1e-4)
    rep = holevo_capacity(ch.identity(), 4000, seed=seed)
    c = rep.capacity_nats
    s.add("identity capacity in [log2 - 1e-3, log2 + 1e-6]", 4000, abs(c - LOG2), 1e-3,
          passed=LOG2 - 1e-3 <= c <= LOG2 + 1e-6)
    caps = [holevo_capacity(ch.depolarizing(t), 400, seed=seed).capacity_nats for t in np.linspace(0, 1, 11)]
    s.add("depolarizing capacity nondecreasing", 11, max(0.0, -np.diff(caps).min()), 1e-12)
    base = ch.amplitude_damping(0.4)
    rot = ch.rotation(rng.normal(size=3), 1.1)
    turned = ch.AffineChannel(rot.matrix @ base.matrix, rot.matrix @ base.offset, "rotated")
    diff = abs(holevo_capacity(base, 1000, seed=seed).capacity_nats
               - holevo_capacity(turned, 1000, seed=seed).capacity_nats)
    s.add("rotation invariance", 1000, diff, 1e-5)
    return s.rows


def suite_stability(rng):
    s = _Suite("stability")
    seed = int(rng.integers(0, 2**31))
    worst, n = 0.0, 0
    for build in (ch.depolarizing, ch.amplitude_damping, ch.phase_damping, lambda p: ch.planar(p, p)):
        for p in (0.25, 0.5, 0.75):
            c = build(p)
            a = holevo_capacity(c, 1000, seed=seed).capacity_nats
            b = holevo_capacity(c, 4000, seed=seed).capacity_nats
            worst = max(worst, abs(a - b))
            n += 1
    s.add("|C(N=1000) - C(N=4000)|", n, worst, 5e-4)
    return s.rows


SUITES = {
    "core": suite_core,
    "lemma": suite_lemma,
    "origin": suite_origin,
    "duality": suite_duality,
    "distances": suite_distances,
    "channels": suite_channels,
    "pure-modes": suite_pure_modes,
    "pure-limit": suite_pure_limit,
    "asymmetry": suite_asymmetry,
    "bisectors": suite_bisectors,
    "solvers": suite_solvers,
    "capacity": suite_capacity,
    "stability": suite_stability,
}


def run(only=None, seed: int = 0) -> list[Check]:
    names = list(SUITES) if not only else list(only)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    rows = []
    for k, name in enumerate(names):
        rng = np.random.default_rng([seed, k, sum(map(ord, name))])
        t0 = time.perf_counter()
        out = SUITES[name](rng)
        dt = time.perf_counter() - t0
        for r in out:
            r.seconds = dt / len(out)
        rows += out
    return rows


def format_table(rows) -> str:
    head = f"{'suite':<10} {'property':<52} {'n':>9} {'max error':>11} {'tol':>9}  status"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(
            f"{r.suite:<10} {r.name:<52} {r.samples:>9d} {r.max_error:>11.3e} "
            f"{r.tolerance:>9.1e}  {'PASS' if r.passed else 'FAIL'}"
        )
        if r.detail:
            lines.append(f"{'':<10}   {r.detail}")
    n_fail = sum(not r.passed for r in rows)
    lines.append(f"{len(rows) - n_fail}/{len(rows)} properties passed")
    return "\n".join(lines)
