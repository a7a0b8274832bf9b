"""
Voronoi diagrams of qubit states.

Six site-comparison rules are supported (:class:`DiagramMode`).  Every one of
them compares two sites through an affine test, in Bloch coordinates or in
dual coordinates, so diagrams are represented by their nearest-site
classification plus pairwise :class:`AffineBisector` halfspaces.  Explicit
cell geometry is only built on the sphere, where all pure-state modes reduce
to intersections of central-plane halfspaces.
"""
from __future__ import annotations

import enum
import io
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .core import PURE_GUARD, as_points, potential, radius
from .geometry import (
    PURE_TOL,
    bures,
    divergence_closed,
    euclidean,
    fubini_study,
    geodesic,
    grad_potential,
)

#: classifications with a margin below this are ties
AMBIGUITY = 1e-9


class ModeError(ValueError):
    """A diagram mode was used with states it is not defined on."""


class DiagramMode(enum.Enum):
    FUBINI_STUDY = "fubini-study"
    BURES = "bures"
    GEODESIC = "geodesic"
    EUCLIDEAN_SECTION = "euclidean-section"
    DIVERGENCE_PRIMAL = "divergence-primal"
    DIVERGENCE_DUAL = "divergence-dual"

    @property
    def pure_only(self) -> bool:
        return self in PURE_MODES

    @classmethod
    def parse(cls, name) -> "DiagramMode":
        if isinstance(name, cls):
            return name
        key = str(name).strip().lower().replace("_", "-")
        for m in cls:
            if m.value == key:
                return m
        raise ModeError(f"unknown diagram mode {name!r}; choose from {[m.value for m in cls]}")


PURE_MODES = (
    DiagramMode.FUBINI_STUDY,
    DiagramMode.BURES,
    DiagramMode.GEODESIC,
)
SPHERE_MODES = PURE_MODES + (DiagramMode.EUCLIDEAN_SECTION,)
DIVERGENCE_MODES = (DiagramMode.DIVERGENCE_PRIMAL, DiagramMode.DIVERGENCE_DUAL)


class SiteSet:
    """Ordered, duplicate-free list of Bloch-vector sites."""

    def __init__(self, points):
        pts = as_points(np.asarray(points, dtype=float).reshape(-1, 3))
        if len(pts) > 1:
            gaps = radius(pts[:, None, :] - pts[None, :, :])
            gaps[np.diag_indices(len(pts))] = np.inf
            if gaps.min() <= 1e-12:
                i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
                raise ValueError(f"sites {min(i, j)} and {max(i, j)} coincide")
        pts.setflags(write=False)
        self.points = pts

    def __len__(self):
        return len(self.points)

    def __getitem__(self, i):
        return self.points[i]

    def __repr__(self):
        return f"SiteSet(n={len(self)})"

    @property
    def pure(self) -> np.ndarray:
        return np.abs(radius(self.points) - 1.0) < PURE_TOL

    @property
    def radii(self) -> np.ndarray:
        return radius(self.points)


def _as_sites(sites) -> SiteSet:
    return sites if isinstance(sites, SiteSet) else SiteSet(sites)


@dataclass(frozen=True, eq=False)
class DiagramAssignment:
    """Owning site per query; ``margins`` is runner-up minus winner."""

    queries: np.ndarray
    sites: np.ndarray
    margins: np.ndarray
    mode: DiagramMode
    epsilon: Optional[float] = None

    @property
    def ambiguous(self) -> np.ndarray:
        return self.margins < AMBIGUITY

    def __len__(self):
        return len(self.sites)


@dataclass(frozen=True, eq=False)
class AffineBisector:
    """Halfspace ``normal . p <= offset`` where site ``i`` wins or ties.

    ``frame`` is ``"primal"`` when ``p`` is a Bloch vector and ``"dual"`` when
    ``p`` is the dual-coordinate image of one.
    """

    normal: np.ndarray
    offset: float
    frame: str = "primal"

    def side(self, points) -> np.ndarray:
        """Signed value ``normal . p - offset`` for Bloch vectors ``points``."""
        p = as_points(points)
        if self.frame == "dual":
            p = grad_potential(p)
        return p @ self.normal - self.offset


def _check(mode, sites, queries):
    if mode in PURE_MODES:
        if not sites.pure.all():
            raise ModeError(f"{mode.value} diagrams need pure sites")
        if np.any(np.abs(radius(queries) - 1.0) >= PURE_TOL):
            raise ModeError(f"{mode.value} diagrams need pure queries")
    elif mode is DiagramMode.DIVERGENCE_PRIMAL:
        if np.any(sites.radii > 1.0 - PURE_GUARD):
            raise ModeError("divergence-primal diagrams need mixed (interior) sites")
    elif mode is DiagramMode.DIVERGENCE_DUAL:
        if np.any(radius(queries) > 1.0 - PURE_GUARD):
            raise ModeError("divergence-dual diagrams need mixed (interior) queries")


def site_distances(mode, sites, queries) -> np.ndarray:
    """Matrix ``(n_queries, n_sites)`` of the mode's distance or divergence.

    Divergence modes put the query first for the primal diagram,
    ``D(query || site)``, and second for the dual one, ``D(site || query)``.
    """
    mode = DiagramMode.parse(mode)
    sites = _as_sites(sites)
    q = as_points(np.asarray(queries, dtype=float).reshape(-1, 3))
    _check(mode, sites, q)
    qq, ss = q[:, None, :], sites.points[None, :, :]
    if mode is DiagramMode.FUBINI_STUDY:
        return fubini_study(qq, ss)
    if mode is DiagramMode.BURES:
        return bures(qq, ss)
    if mode is DiagramMode.GEODESIC:
        return geodesic(qq, ss)
    if mode is DiagramMode.EUCLIDEAN_SECTION:
        return euclidean(qq, ss)
    if mode is DiagramMode.DIVERGENCE_PRIMAL:
        return divergence_closed(qq, ss)
    return divergence_closed(ss, qq)


def assign(mode, sites, queries, *, epsilon=None) -> DiagramAssignment:
    """Nearest-site classification of a batch of queries.

    Ties go to the lowest site index (``argmin`` order).
    """
    mode = DiagramMode.parse(mode)
    sites = _as_sites(sites)
    if len(sites) == 0:
        raise ValueError("empty site set")
    q = as_points(np.asarray(queries, dtype=float).reshape(-1, 3))
    d = np.atleast_2d(site_distances(mode, sites, q))
    win = np.argmin(d, axis=1)
    best = d[np.arange(len(q)), win]
    if d.shape[1] > 1:
        runner = np.partition(d, 1, axis=1)[:, 1]
        margins = runner - best
    else:
        margins = np.full(len(q), np.inf)
    return DiagramAssignment(q, win, margins, mode, epsilon)


def classify(mode, sites, query) -> tuple[int, float]:
    """Winning site index and margin for a single query."""
    a = assign(mode, sites, np.asarray(query, dtype=float).reshape(1, 3))
    return int(a.sites[0]), float(a.margins[0])


def bisector(mode, site_i, site_j) -> AffineBisector:
    """Affine halfspace on which ``site_i`` beats or ties ``site_j``.

    Primal divergence: ``(c_j s_j - c_i s_i) . p <= (L_i - L_j) / 2`` with
    ``c = artanh(r)/r`` and ``L = log((1 - r^2)/4)``.  Dual divergence, in
    dual coordinates ``u``: ``(s_j - s_i) . u <= phi(s_j) - phi(s_i)``.
    The sphere modes give the central plane normal to ``s_j - s_i``.
    """
    mode = DiagramMode.parse(mode)
    si = as_points(site_i).reshape(3)
    sj = as_points(site_j).reshape(3)
    if radius(si - sj) <= 1e-12:
        raise ValueError("bisector of coincident sites")
    frame = "primal"
    if mode in PURE_MODES:
        _check(mode, SiteSet([si, sj]), np.empty((0, 3)))
        normal, offset = sj - si, 0.0
    elif mode is DiagramMode.EUCLIDEAN_SECTION:
        normal = sj - si
        offset = 0.5 * (sj @ sj - si @ si)
    elif mode is DiagramMode.DIVERGENCE_PRIMAL:
        _check(mode, SiteSet([si, sj]), np.empty((0, 3)))
        ui, uj = grad_potential(si), grad_potential(sj)
        ri, rj = radius(si), radius(sj)
        li = np.log1p(-ri * ri) - 2 * np.log(2.0)
        lj = np.log1p(-rj * rj) - 2 * np.log(2.0)
        normal = uj - ui
        offset = 0.5 * (li - lj)
    else:
        frame = "dual"
        normal = sj - si
        offset = potential(sj) - potential(si)
    scale = np.linalg.norm(normal)
    return AffineBisector(normal / scale, float(offset) / scale, frame)


# -- sphere ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SphericalEdge:
    """Arcs of the great circle ``(s_i - s_j) . p = 0`` bounding cells i, j.

    The circle is ``cos(t) e1 + sin(t) e2``; ``arcs`` holds ``(t0, t1)``
    parameter intervals with ``t0 < t1`` (``t1`` may exceed ``2 pi``).
    """

    i: int
    j: int
    e1: np.ndarray
    e2: np.ndarray
    arcs: tuple

    def points(self, per_arc: int = 32) -> list[np.ndarray]:
        out = []
        for t0, t1 in self.arcs:
            t = np.linspace(t0, t1, per_arc)[:, None]
            out.append(np.cos(t) * self.e1 + np.sin(t) * self.e2)
        return out


@dataclass(frozen=True, eq=False)
class SphericalDiagram:
    sites: SiteSet
    vertices: np.ndarray
    vertex_sites: list
    edges: list
    adjacency: dict = field(default_factory=dict)

    def neighbours(self, i: int) -> list[int]:
        return self.adjacency.get(i, [])


def _circle_basis(n):
    n = n / np.linalg.norm(n)
    a = np.eye(3)[np.argmin(np.abs(n))]
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(n, e1)


def _edge_arcs(pts, i, j, tol=1e-12):
    si, sj = pts[i], pts[j]
    e1, e2 = _circle_basis(si - sj)
    others = [k for k in range(len(pts)) if k not in (i, j)]
    if not others:
        return e1, e2, ((0.0, 2 * np.pi),)
    diff = pts[others] - si
    a, b = diff @ e1, diff @ e2
    psi = np.arctan2(b, a)
    keep = np.hypot(a, b) > 1e-15
    a, b, psi = a[keep], b[keep], psi[keep]
    brk = np.sort(np.mod(np.concatenate([psi + np.pi / 2, psi - np.pi / 2]), 2 * np.pi))
    if len(brk) == 0:
        return e1, e2, ((0.0, 2 * np.pi),)
    lo = brk
    hi = np.append(brk[1:], brk[0] + 2 * np.pi)
    arcs = []
    for t0, t1 in zip(lo, hi):
        if t1 - t0 <= tol:
            continue
        mid = 0.5 * (t0 + t1)
        if np.all(a * np.cos(mid) + b * np.sin(mid) < 0):
            if arcs and abs(arcs[-1][1] - t0) <= tol:
                arcs[-1] = (arcs[-1][0], t1)
            else:
                arcs.append((t0, t1))
    if len(arcs) > 1 and abs(arcs[-1][1] - 2 * np.pi - arcs[0][0]) <= tol:
        arcs[0] = (arcs[-1][0], arcs[0][1] + 2 * np.pi)
        arcs.pop()
    return e1, e2, tuple((float(t0), float(t1)) for t0, t1 in arcs)


def spherical_diagram(sites, *, vertex_tol: float = 1e-9) -> SphericalDiagram:
    """Voronoi diagram of pure sites on the Bloch sphere.

    Vertices are the unit vectors equidistant from three or more sites and
    no closer to any other site; two cells are adjacent when their common
    bisector circle carries an arc of positive length inside both.
    """
    sites = _as_sites(sites)
    n = len(sites)
    if n < 2:
        raise ValueError("a spherical diagram needs at least two sites")
    if not sites.pure.all():
        raise ModeError("spherical diagrams need pure sites")
    pts = sites.points

    verts, vsets = [], []
    if n >= 3:
        tri = np.array(list(itertools.combinations(range(n), 3)))
        c = np.cross(pts[tri[:, 0]] - pts[tri[:, 1]], pts[tri[:, 0]] - pts[tri[:, 2]])
        norm = np.linalg.norm(c, axis=1)
        ok = norm > 1e-14
        c = c[ok] / norm[ok, None]
        tri = tri[ok]
        for sign in (1.0, -1.0):
            p = sign * c
            sims = p @ pts.T
            top = sims.max(axis=1)
            own = sims[np.arange(len(p)), tri[:, 0]]
            for k in np.nonzero(own >= top - vertex_tol)[0]:
                if any(np.linalg.norm(p[k] - v) < 1e-7 for v in verts):
                    continue
                verts.append(p[k])
                vsets.append(tuple(int(s) for s in np.nonzero(sims[k] >= top[k] - vertex_tol)[0]))
    order = sorted(range(len(verts)), key=lambda k: vsets[k])
    vertices = np.array([verts[k] for k in order]).reshape(-1, 3)
    vertex_sites = [vsets[k] for k in order]

    edges, adjacency = [], {i: [] for i in range(n)}
    for i, j in itertools.combinations(range(n), 2):
        e1, e2, arcs = _edge_arcs(pts, i, j)
        if arcs and max(t1 - t0 for t0, t1 in arcs) > 1e-9:
            edges.append(SphericalEdge(i, j, e1, e2, arcs))
            adjacency[i].append(j)
            adjacency[j].append(i)
    return SphericalDiagram(sites, vertices, vertex_sites, edges, adjacency)


def pure_limit_section(sites, epsilon: float, mode, queries) -> DiagramAssignment:
    """Divergence diagram of pure sites on the sphere of radius ``1 - epsilon``.

    Sites and queries are pulled radially to radius ``1 - epsilon``, classified
    under the divergence mode, and reported against the original queries.
    """
    mode = DiagramMode.parse(mode)
    if mode not in DIVERGENCE_MODES:
        raise ModeError("limit sections are defined for the divergence modes only")
    epsilon = float(epsilon)
    if not 0.0 < epsilon <= 0.5:
        raise ValueError(f"epsilon must lie in (0, 0.5], got {epsilon}")
    sites = _as_sites(sites)
    q = as_points(np.asarray(queries, dtype=float).reshape(-1, 3))
    if not sites.pure.all() or np.any(np.abs(radius(q) - 1.0) >= PURE_TOL):
        raise ModeError("limit sections take pure sites and pure queries")
    shrink = 1.0 - epsilon
    a = assign(mode, SiteSet(sites.points * shrink), q * shrink)
    return DiagramAssignment(q, a.sites, a.margins, mode, epsilon)


@dataclass(frozen=True)
class Mismatch:
    query: int
    point: tuple
    site_a: int
    site_b: int
    margin_a: float
    margin_b: float


def diagrams_equal(a: DiagramAssignment, b: DiagramAssignment,
                   band: float = AMBIGUITY) -> tuple[bool, list[Mismatch]]:
    """Compare two assignments of the same queries outside the tie band."""
    if a.queries.shape != b.queries.shape or not np.array_equal(a.queries, b.queries):
        raise ValueError("assignments cover different query lists")
    clear = (a.margins >= band) & (b.margins >= band)
    bad = np.nonzero(clear & (a.sites != b.sites))[0]
    report = [
        Mismatch(int(k), tuple(a.queries[k]), int(a.sites[k]), int(b.sites[k]),
                 float(a.margins[k]), float(b.margins[k]))
        for k in bad
    ]
    return not report, report


# -- meshes and export ----------------------------------------------------

# Fixed generic tilt of the export mesh.  The icosphere is centrally
# symmetric, and after the tilt no face centroid lies on a coordinate plane,
# so antipodal sites split the faces evenly instead of tying on the equator.
MESH_TILT = Rotation.from_rotvec([0.2137, -0.1412, 0.3301]).as_matrix()


def icosphere(subdivisions: int = 5, tilt: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Unit-sphere triangle mesh with ``20 * 4**subdivisions`` faces.

    With ``tilt`` the mesh is turned by :data:`MESH_TILT`.
    """
    t = (1.0 + 5 ** 0.5) / 2.0
    verts = [
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in verts]
    for _ in range(subdivisions):
        cache, new_faces = {}, []

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    verts = np.array(verts)
    if tilt:
        verts = verts @ MESH_TILT.T
        verts /= radius(verts)[:, None]
    return verts, np.array(faces, dtype=np.int64)


def label_faces(sites, verts, faces, mode=DiagramMode.GEODESIC) -> np.ndarray:
    """Owning site of each mesh face, judged at its normalised centroid."""
    c = verts[faces].mean(axis=1)
    c /= radius(c)[:, None]
    return assign(mode, sites, c).sites


def face_areas(verts, faces) -> np.ndarray:
    """Spherical-triangle areas (solid angles) by the Van Oosterom-Strackee formula."""
    a, b, c = verts[faces[:, 0]], verts[faces[:, 1]], verts[faces[:, 2]]
    num = np.abs(np.einsum("ij,ij->i", a, np.cross(b, c)))
    den = 1 + np.einsum("ij,ij->i", a, b) + np.einsum("ij,ij->i", b, c) + np.einsum("ij,ij->i", c, a)
    return 2 * np.arctan2(num, den)


def _off_bytes(verts, faces, labels) -> bytes:
    buf = io.StringIO()
    buf.write("OFF\n")
    buf.write(f"# face colour = site index\n{len(verts)} {len(faces)} 0\n")
    for v in verts:
        buf.write(f"{v[0]:.12g} {v[1]:.12g} {v[2]:.12g}\n")
    for f, s in zip(faces, labels):
        buf.write(f"3 {f[0]} {f[1]} {f[2]} {s}\n")
    return buf.getvalue().encode()


def export_cells(diagram, fmt: str = "off", *, subdivisions: Optional[int] = None,
                 mode=DiagramMode.GEODESIC) -> bytes:
    """Serialise the sphere cells of a diagram.

    ``off`` writes an icosphere mesh whose face colour field is the owning
    site index; ``svg`` draws the stereographic projection from the north
    pole.  Output bytes depend only on the sites and the resolution.
    """
    sites = diagram.sites if isinstance(diagram, SphericalDiagram) else _as_sites(diagram)
    if len(sites) == 0:
        raise ValueError("cannot export an empty site set")
    fmt = fmt.lower()
    if fmt not in ("off", "svg"):
        raise ValueError(f"unsupported export format {fmt!r}")
    if subdivisions is None:
        subdivisions = 5 if fmt == "off" else 4
    verts, faces = icosphere(subdivisions)
    labels = label_faces(sites, verts, faces, mode)
    if fmt == "off":
        return _off_bytes(verts, faces, labels)
    from .plotting import stereographic_svg

    return stereographic_svg(sites.points, verts, faces, labels)
