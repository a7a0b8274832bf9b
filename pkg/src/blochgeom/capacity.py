"""
Smallest enclosing divergence balls and the Holevo capacity of qubit channels.

For points ``p_i`` and a center ``c`` with dual coordinates ``u = grad phi(c)``

    D(p_i || c) = phi(p_i) + phi*(u) - p_i . u,

which is convex in ``u``.  The ball radius ``min_u max_i D(p_i || c)`` is
therefore a convex minimax problem in dual coordinates.  Its dual is the
concave Jensen gap

    J(alpha) = sum_i alpha_i phi(p_i) - phi(sum_i alpha_i p_i)

over the probability simplex, so ``J(alpha)`` lower-bounds the radius for
every ``alpha`` and the optimal center is ``sum_i alpha_i p_i``.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull, QhullError

from .channels import AffineChannel, apply
from .core import LOG2, PURE_GUARD, artanh_ratio, as_points, potential, radius
from .geometry import conjugate_potential, divergence_closed, grad_potential, inverse_grad
from .sampling import sample_sphere

__all__ = [
    "EnclosingBall",
    "CapacityReport",
    "NonConvergenceError",
    "sample_sphere",
    "meb_exact",
    "meb_iterative",
    "meb_grid",
    "holevo_capacity",
]

#: image points are pulled inside this radius
IMAGE_CLAMP = 1.0 - PURE_GUARD
#: largest center radius; keeps dual coordinates finite
CENTER_CLAMP = 1.0 - 10 * PURE_GUARD
EXACT_LIMIT = 16
ATTAIN_TOL = 1e-9


class NonConvergenceError(RuntimeError):
    """The iterative solver ran out of iterations; ``result`` is the best ball found."""

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True, eq=False)
class EnclosingBall:
    center: np.ndarray
    center_dual: np.ndarray
    radius: float
    support: tuple
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    lower_bound: float = float("nan")
    iterations: int = 0

    @property
    def gap(self) -> float:
        """Certified optimality gap (radius minus best dual lower bound)."""
        return self.radius - self.lower_bound


@dataclass(frozen=True, eq=False)
class CapacityReport:
    label: str
    n_samples: int
    capacity_nats: float
    center: np.ndarray
    support: tuple
    solver_gap: float
    exact: bool = False

    @property
    def capacity_bits(self) -> float:
        return self.capacity_nats / LOG2

    def to_dict(self, digits: int = 12) -> dict:
        def g(x):
            return float(f"{x:.{digits}g}")

        return {
            "label": self.label,
            "n_samples": self.n_samples,
            "capacity_nats": g(self.capacity_nats),
            "capacity_bits": g(self.capacity_bits),
            "center": [g(c) for c in self.center],
            "support": [int(s) for s in self.support],
            "solver_gap": g(self.solver_gap),
        }

    def to_json(self, digits: int = 12) -> str:
        return json.dumps(self.to_dict(digits), indent=2)


# -- small dense helpers --------------------------------------------------

def _clamp_center(c):
    r = float(radius(c))
    return c * (CENTER_CLAMP / r) if r > CENTER_CLAMP else c


def _hessian(theta):
    """Hessian of phi: ``artanh(r)/r I + (1/(1-r^2) - artanh(r)/r) theta theta^T / r^2``."""
    r = float(radius(theta))
    c = artanh_ratio(r)
    if r < 1e-3:
        k = 2.0 / 3.0 + 0.8 * r * r
    else:
        k = (1.0 / (1.0 - r * r) - c) / (r * r)
    return c * np.eye(3) + k * np.outer(theta, theta)


def _divergences(points, phis, u):
    return phis + conjugate_potential(u) - points @ u


def _phi_grad_hess(theta):
    """Potential, gradient and Hessian of ``phi`` at one interior point."""
    x, y, z = theta
    r = math.sqrt(x * x + y * y + z * z)
    lam1, lam2 = (1 + r) / 2, (1 - r) / 2
    phi = lam1 * math.log(lam1) + lam2 * math.log(lam2)
    if r < 1e-4:
        r2 = r * r
        c = 1.0 + r2 / 3.0 + r2 * r2 / 5.0
    else:
        c = math.atanh(r) / r
    if r < 1e-3:
        k = 2.0 / 3.0 + 0.8 * r * r
    else:
        k = (1.0 / (1.0 - r * r) - c) / (r * r)
    return phi, c * theta, c * np.eye(3) + k * np.outer(theta, theta)


def _support_ball(pts, phis, max_iter=100):
    """Stationary point of the Jensen gap over the affine hull of ``pts``.

    Returns ``(alpha, center, value)`` or ``None`` when the points are
    affinely dependent or the stationary point is not inside the ball.  Every
    point of ``pts`` has divergence ``value`` from ``center``.
    """
    k = len(pts)
    if k == 1:
        c = _clamp_center(pts[0].copy())
        return np.ones(1), c, 0.0
    q = pts[1:] - pts[0]
    sv = np.linalg.svd(q, compute_uv=False)
    if sv[-1] <= 1e-10 * max(sv[0], 1e-300):
        return None
    dphi = phis[1:] - phis[0]
    beta = np.full(k - 1, 1.0 / k)
    theta = pts[0] + beta @ q
    phi, grad, hess = _phi_grad_hess(theta)
    jv = phis[0] + beta @ dphi - phi
    for _ in range(max_iter):
        g = dphi - q @ grad
        try:
            step = np.linalg.solve(q @ hess @ q.T, g)
        except np.linalg.LinAlgError:
            return None
        t = 1.0
        while True:
            bn = beta + t * step
            thn = pts[0] + bn @ q
            if thn @ thn < CENTER_CLAMP * CENTER_CLAMP:
                phn, grn, hen = _phi_grad_hess(thn)
                jn = phis[0] + bn @ dphi - phn
                if jn >= jv - 1e-15 * max(1.0, abs(jv)):
                    break
            if t < 1e-12:
                return None
            t *= 0.5
        beta, theta, jv = bn, thn, jn
        grad, hess = grn, hen
        if np.max(np.abs(t * step)) < 1e-14:
            break
    g = dphi - q @ grad
    if np.max(np.abs(g)) > 1e-9:
        return None
    alpha = np.concatenate([[1.0 - beta.sum()], beta])
    return alpha, theta, float(jv)


def _search(points, phis, idx, tol=ATTAIN_TOL):
    """Combinatorial smallest ball of ``points[idx]`` (supports of size 1 to 4).

    The first candidate whose weights are nonnegative and whose ball holds
    every point of ``idx`` satisfies the optimality conditions, so it is
    returned as soon as it is found.
    """
    idx = list(idx)
    sub = points[idx]
    sub_phi = phis[idx]
    best = None
    for k in range(1, min(4, len(idx)) + 1):
        for comb in itertools.combinations(range(len(idx)), k):
            res = _support_ball(sub[list(comb)], sub_phi[list(comb)])
            if res is None:
                continue
            alpha, theta, val = res
            if alpha.min() < -1e-12:
                continue
            u = grad_potential(theta)
            d = _divergences(sub, sub_phi, u)
            rad = float(d.max())
            if best is None or rad < best[3]:
                best = (comb, alpha, theta, rad, val)
            if rad <= val + tol:
                return [idx[c] for c in comb], np.clip(alpha, 0.0, None), theta, rad, val
    if best is None:
        raise RuntimeError("no feasible support found")
    comb, alpha, theta, rad, val = best
    return [idx[c] for c in comb], np.clip(alpha, 0.0, None), theta, rad, val


def _ball(points, phis, support, weights, theta, lower, iterations=0):
    u = grad_potential(theta)
    d = _divergences(points, phis, u)
    rad = max(float(d.max()), 0.0)
    if support is None:
        support = tuple(int(i) for i in np.nonzero(d >= rad - ATTAIN_TOL)[0][:4])
    order = np.argsort(support)
    support = tuple(int(support[o]) for o in order)
    weights = np.asarray(weights)[order] if len(weights) else np.asarray(weights)
    return EnclosingBall(theta, u, rad, support, weights, float(lower), iterations)


def _prepare(points):
    pts = as_points(np.asarray(points, dtype=float).reshape(-1, 3))
    if len(pts) == 0:
        raise ValueError("empty point set")
    return pts, np.asarray(potential(pts), dtype=float).reshape(-1)


def _coincident(pts):
    return float(radius(pts - pts[0]).max()) <= 1e-12


def _trivial(pts, phis):
    theta = _clamp_center(pts[0].copy())
    return _ball(pts, phis, (0,), np.ones(1), theta, 0.0)


def hull_filter(points) -> np.ndarray:
    """Indices of points that can attain the maximum divergence from any center.

    ``D(. || c)`` is convex, so its maximum over the set is attained at a
    vertex of the convex hull.
    """
    pts = np.asarray(points, dtype=float)
    if len(pts) <= 4:
        return np.arange(len(pts))
    try:
        return np.sort(ConvexHull(pts).vertices)
    except QhullError:
        return np.arange(len(pts))


# -- solvers --------------------------------------------------------------

def meb_exact(points) -> EnclosingBall:
    """Smallest enclosing divergence ball by support enumeration.

    Handles up to 16 points after discarding non-hull-vertices.

    Raises
    ------
    ValueError
        If the set is empty or more than 16 hull vertices remain.
    """
    pts, phis = _prepare(points)
    if _coincident(pts):
        return _trivial(pts, phis)
    idx = np.arange(len(pts))
    if len(pts) > EXACT_LIMIT:
        idx = hull_filter(pts)
        if len(idx) > EXACT_LIMIT:
            raise ValueError(
                f"{len(idx)} hull vertices exceed the exact-solver limit of {EXACT_LIMIT}"
            )
    support, weights, theta, rad, val = _search(pts, phis, idx)
    return _ball(pts, phis, support, weights, theta, val)


def meb_iterative(points, tol: float = 1e-9, max_iter: int = 10000,
                  stall_window: int = 50) -> EnclosingBall:
    """Minimax center by projected-free subgradient descent in dual coordinates.

    Each step moves ``u`` against the subgradient ``grad phi*(u) - p_far`` with
    the Polyak length ``(F(u) - L) / |g|^2``, where ``L`` is the radius of
    the smallest ball of a small working set (support plus the current
    farthest point), a valid lower bound.  The working set grows by the
    farthest violator of its own ball, which strictly raises ``L``.  The
    search ends when the best upper bound is within ``tol`` of ``L`` or when
    the upper bound improves by less than ``tol / 10`` over ``stall_window``
    iterations.

    Raises
    ------
    NonConvergenceError
        After ``max_iter`` iterations; carries the best ball so far.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    pts, phis = _prepare(points)
    if _coincident(pts):
        return _trivial(pts, phis)

    centroid = _clamp_center(pts.mean(axis=0))
    u = grad_potential(centroid)
    far = int(np.argmax(_divergences(pts, phis, u)))
    work = [far]
    support, weights, w_theta, _, lower = _search(pts, phis, work)
    w_u = grad_potential(w_theta)

    best_u, upper = u, np.inf
    best_ws = None
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        # working-set ball: lower bound and candidate center
        dw = _divergences(pts, phis, w_u)
        viol = int(np.argmax(dw))
        if dw[viol] < upper:
            upper, best_u = float(dw[viol]), w_u
            best_ws = (support, weights, w_theta, lower)
        if dw[viol] > lower + tol and viol not in support:
            work = sorted(set(support) | {viol})
            support, weights, w_theta, _, val = _search(pts, phis, work)
            lower = max(lower, val)
            w_u = grad_potential(w_theta)
            history.clear()

        # subgradient step
        d = _divergences(pts, phis, u)
        i = int(np.argmax(d))
        f = float(d[i])
        if f < upper:
            upper, best_u, best_ws = f, u, None
        if upper - lower <= tol:
            break
        g = inverse_grad(u) - pts[i]
        gg = float(g @ g)
        if gg == 0.0:
            break
        u = u - (f - lower) / gg * g

        history.append(upper)
        if len(history) > stall_window and history[-stall_window - 1] - upper < tol / 10:
            break
    else:
        res = _finish(pts, phis, best_u, best_ws, lower, it)
        raise NonConvergenceError(
            f"no convergence in {max_iter} iterations (gap {res.gap:.3e})", res
        )
    return _finish(pts, phis, best_u, best_ws, lower, it)


def _finish(pts, phis, u, ws, lower, it):
    if ws is not None:
        support, weights, theta, _ = ws
        return _ball(pts, phis, support, weights, theta, lower, it)
    return _ball(pts, phis, None, np.zeros(0), inverse_grad(u), lower, it)


def meb_grid(points, resolution: int = 16, restarts: int = 4) -> EnclosingBall:
    """Brute-force upper bound: spherical grid of centers plus Nelder-Mead.

    ``resolution**3`` centers on a radial-polar-azimuthal grid with radii up
    to ``1 - 1e-6`` are scanned; the best one is refined by Nelder-Mead in
    dual coordinates.  The reported radius is the exact objective at the
    returned center, so it never undercuts the true minimum.
    """
    if resolution < 8:
        raise ValueError("resolution must be at least 8")
    pts = as_points(np.asarray(points, dtype=float).reshape(-1, 3))
    if len(pts) == 0:
        raise ValueError("empty point set")

    rs = np.linspace(0.0, 1.0 - 1e-6, resolution)
    th = (np.arange(resolution) + 0.5) * math.pi / resolution
    ph = np.arange(resolution) * 2 * math.pi / resolution
    R, T, P = np.meshgrid(rs, th, ph, indexing="ij")
    centers = np.stack(
        [R * np.sin(T) * np.cos(P), R * np.sin(T) * np.sin(P), R * np.cos(T)], axis=-1
    ).reshape(-1, 3)
    best_f, best_c = np.inf, None
    for chunk in np.array_split(centers, max(1, len(centers) * len(pts) // 2_000_000)):
        f = divergence_closed(pts[None, :, :], chunk[:, None, :]).max(axis=1)
        k = int(np.argmin(f))
        if f[k] < best_f:
            best_f, best_c = float(f[k]), chunk[k]

    def objective(u):
        c = inverse_grad(u)
        if radius(c) > CENTER_CLAMP:
            return np.inf
        return float(np.max(divergence_closed(pts, c)))

    u = grad_potential(best_c)
    f = objective(u)
    scale = 0.1
    for _ in range(restarts):
        simplex = np.vstack([u, u + scale * np.eye(3)])
        res = minimize(objective, u, method="Nelder-Mead",
                       options={"xatol": 1e-13, "fatol": 1e-15, "maxiter": 20000,
                                "initial_simplex": simplex})
        if res.fun <= f:
            u, f = res.x, float(res.fun)
        scale *= 0.1
    center = inverse_grad(u)
    d = np.asarray(divergence_closed(pts, center)).reshape(-1)
    rad = float(d.max())
    support = tuple(int(i) for i in np.nonzero(d >= rad - ATTAIN_TOL)[0][:4])
    return EnclosingBall(center, u, rad, support, np.zeros(0), float("nan"), 0)


def _push(channel, dirs):
    img = apply(channel, dirs)
    r = radius(img)
    over = r > IMAGE_CLAMP
    img[over] *= (IMAGE_CLAMP / r[over])[:, None]
    return img


def channel_image(channel: AffineChannel, n_samples: int, seed=0) -> np.ndarray:
    """Sphere samples pushed through ``channel``, radii clamped below 1."""
    return _push(channel, sample_sphere(n_samples, seed))


def _refine_direction(channel, v0, u):
    """Input direction near ``v0`` whose image is locally most divergent from
    the center with dual coordinates ``u``."""
    e1 = np.cross(v0, np.eye(3)[np.argmin(np.abs(v0))])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v0, e1)
    m, b = channel.matrix, channel.offset
    phi_star = conjugate_potential(u)

    def direction(ab):
        v = v0 + ab[0] * e1 + ab[1] * e2
        return v / math.sqrt(v @ v)

    def neg_div(ab):
        p = m @ direction(ab) + b
        r = math.sqrt(p @ p)
        if r > IMAGE_CLAMP:
            p, r = p * (IMAGE_CLAMP / r), IMAGE_CLAMP
        lam1, lam2 = (1 + r) / 2, (1 - r) / 2
        phi = lam1 * math.log(lam1) + (lam2 * math.log(lam2) if lam2 > 0 else 0.0)
        return -(phi + phi_star - p @ u)

    res = minimize(neg_div, np.zeros(2), method="Nelder-Mead",
                   options={"xatol": 1e-6, "fatol": 1e-13, "maxiter": 400,
                            "initial_simplex": [[0, 0], [0.02, 0], [0, 0.02]]})
    return direction(res.x), -float(res.fun)


def holevo_capacity(channel: AffineChannel, n_samples: int = 2000, tol: float = 1e-9,
                    seed=0, cross_check: int = 12, refine: bool = True,
                    refine_tol: float = 1e-8, max_rounds: int = 6) -> CapacityReport:
    """Holevo capacity as the radius of the smallest divergence ball of the
    sampled channel image.

    The iterative solver gives the answer.  With ``refine`` each support
    direction is then moved to a local maximum of the divergence from the
    current center and the extra images are added, repeated until no
    direction improves by more than ``refine_tol``; the result is still the ball of
    a subset of the true image.  The exact solver is rerun on the final
    support plus the most divergent remaining points (``cross_check`` in
    total) and ``solver_gap`` is the difference of the two radii.  Support
    indices at or beyond ``n_samples`` refer to refined directions.
    """
    if n_samples < 16:
        raise ValueError("n_samples must be at least 16")
    dirs = sample_sphere(n_samples, seed)
    img = _push(channel, dirs)
    if _coincident(img):
        return CapacityReport(channel.label, n_samples, 0.0, img[0].copy(), (0,), 0.0, exact=True)
    ball = meb_iterative(img, tol=tol)
    for _ in range(max_rounds if refine else 0):
        extra = []
        for s in ball.support:
            v, dv = _refine_direction(channel, dirs[s], ball.center_dual)
            if dv > ball.radius + refine_tol:
                extra.append(v)
        if not extra:
            break
        dirs = np.vstack([dirs, extra])
        img = _push(channel, dirs)
        ball = meb_iterative(img, tol=tol)

    d = _divergences(img, np.asarray(potential(img)), ball.center_dual)
    chosen = list(ball.support)
    for k in np.argsort(-d, kind="stable"):
        if len(chosen) >= cross_check:
            break
        if int(k) not in chosen:
            chosen.append(int(k))
    sub = meb_exact(img[chosen])
    gap = abs(ball.radius - sub.radius)
    return CapacityReport(channel.label, n_samples, ball.radius, ball.center,
                          ball.support, gap)


def capacity_details(channel: AffineChannel, n_samples: int = 2000, seed=0, refine=True):
    """Report plus sampled image points and their divergences to the center, for figures."""
    img = channel_image(channel, n_samples, seed)
    rep = holevo_capacity(channel, n_samples, seed=seed, refine=refine)
    c = _clamp_center(np.asarray(rep.center, dtype=float))
    return rep, img, np.asarray(divergence_closed(img, c))
