"""
Figures for diagrams and capacity reports.

Everything renders through the Agg/SVG backends with a fixed hash salt and no
date stamp, so the same inputs give byte-identical files.
"""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.collections import PolyCollection  # noqa: E402

RC = {
    "svg.hashsalt": "blochgeom",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.6,
    "path.simplify": False,
}
#: stereographic images are clipped to this disc radius
CLIP = 4.0


def _palette(n):
    cmap = plt.get_cmap("tab20" if n > 10 else "tab10")
    return [cmap(k % cmap.N) for k in range(n)]


def stereographic(points) -> np.ndarray:
    """Projection from the north pole onto the equatorial plane."""
    p = np.asarray(points, dtype=float)
    d = 1.0 - p[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.stack([p[..., 0] / d, p[..., 1] / d], axis=-1)


def draw_stereographic(ax, site_points, verts, faces, labels):
    """Fill mesh faces by owning site in the stereographic plane."""
    proj = stereographic(verts)
    tri = proj[faces]
    keep = np.isfinite(tri).all(axis=(1, 2)) & (np.abs(tri) <= CLIP).all(axis=(1, 2))
    colours = _palette(int(max(labels.max() + 1, len(site_points))))
    pc = PolyCollection(
        tri[keep],
        facecolors=[colours[s] for s in labels[keep]],
        edgecolors="none",
        antialiased=False,
    )
    ax.add_collection(pc)
    t = np.linspace(0, 2 * np.pi, 256)
    ax.plot(np.cos(t), np.sin(t), color="k", lw=0.5, ls="--")
    sp = stereographic(site_points)
    vis = np.isfinite(sp).all(axis=1) & (np.abs(sp) <= CLIP).all(axis=1)
    ax.scatter(sp[vis, 0], sp[vis, 1], s=12, c="k", zorder=3)
    for k in np.nonzero(vis)[0]:
        ax.annotate(str(k), sp[k], xytext=(3, 3), textcoords="offset points")
    ax.set_xlim(-CLIP, CLIP)
    ax.set_ylim(-CLIP, CLIP)
    ax.set_aspect("equal")
    ax.set_xlabel("x / (1 - z)")
    ax.set_ylabel("y / (1 - z)")
    return ax


def _save(fig, fmt) -> bytes:
    buf = io.BytesIO()
    meta = {"Date": None} if fmt == "svg" else {}
    if fmt == "png":
        meta = {"Software": None}
    fig.savefig(buf, format=fmt, metadata=meta)
    plt.close(fig)
    return buf.getvalue()


def stereographic_svg(site_points, verts, faces, labels) -> bytes:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        draw_stereographic(ax, site_points, verts, faces, labels)
        ax.set_title("Voronoi cells, stereographic view")
        return _save(fig, "svg")


def diagram_figure(site_points, verts, faces, labels, path, title=None) -> None:
    fmt = str(path).rsplit(".", 1)[-1].lower()
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 5))
        draw_stereographic(ax, site_points, verts, faces, labels)
        if title:
            ax.set_title(title)
        data = _save(fig, fmt)
    with open(path, "wb") as fh:
        fh.write(data)


def capacity_figure(points, divergences, center, radius_nats, path, title=None) -> None:
    """Channel image points in three coordinate planes, coloured by divergence
    to the ball center, with the divergence histogram alongside."""
    points = np.asarray(points)
    fmt = str(path).rsplit(".", 1)[-1].lower()
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 4, figsize=(13, 3.4))
        t = np.linspace(0, 2 * np.pi, 256)
        for ax, (i, j), names in zip(axes, [(0, 1), (0, 2), (1, 2)], ["xy", "xz", "yz"]):
            sc = ax.scatter(points[:, i], points[:, j], c=divergences, s=3,
                            cmap="viridis", vmin=0.0, vmax=max(radius_nats, 1e-12))
            ax.plot(np.cos(t), np.sin(t), color="0.5", lw=0.5)
            ax.plot(center[i], center[j], "r+", ms=9)
            ax.set_aspect("equal")
            ax.set_xlim(-1.05, 1.05)
            ax.set_ylim(-1.05, 1.05)
            ax.set_xlabel(names[0])
            ax.set_ylabel(names[1])
        fig.colorbar(sc, ax=axes[2], label="D(p || center) [nats]")
        axes[3].hist(divergences, bins=40, color="0.3")
        axes[3].axvline(radius_nats, color="r", lw=0.8)
        axes[3].set_xlabel("divergence to center [nats]")
        if title:
            fig.suptitle(title)
        fig.tight_layout()
        data = _save(fig, fmt)
    with open(path, "wb") as fh:
        fh.write(data)
