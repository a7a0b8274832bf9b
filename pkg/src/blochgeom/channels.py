"""
Qubit channels as affine maps ``v -> M v + b`` on Bloch coordinates.

A channel is accepted when the image ellipsoid of the unit ball stays inside
the ball; complete positivity is not checked.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .core import as_points
from .sampling import fibonacci_sphere

IMAGE_TOL = 1e-9


class InvalidChannelError(ValueError):
    """The channel image leaves the Bloch ball, or parameters are invalid."""

    def __init__(self, message, overflow=None):
        super().__init__(message)
        self.overflow = overflow


def _ascend(matrix, offset, v, iters=500):
    # f(v) = |M v + b|^2 is convex, so stepping to the maximiser of its
    # linearisation on the sphere never decreases f.
    for _ in range(iters):
        g = (matrix @ v + offset) @ matrix
        n = np.linalg.norm(g)
        if n == 0.0:
            break
        w = g / n
        if np.allclose(w, v, rtol=0, atol=1e-15):
            v = w
            break
        v = w
    return v


def validate_image(channel_or_matrix, offset=None, *, n_directions: int = 4096) -> float:
    """Largest ``|M v + b| - 1`` over unit vectors ``v``.

    Fibonacci sampling locates the best directions, which are then refined by
    monotone ascent.  A channel is admissible iff the result is at most 1e-9.
    Accepts an :class:`AffineChannel` or a raw ``(matrix, offset)`` pair.
    """
    if isinstance(channel_or_matrix, AffineChannel):
        m, b = channel_or_matrix.matrix, channel_or_matrix.offset
    else:
        m = np.asarray(channel_or_matrix, dtype=float)
        b = np.zeros(3) if offset is None else np.asarray(offset, dtype=float)
    dirs = fibonacci_sphere(n_directions)
    norms = np.linalg.norm(dirs @ m.T + b, axis=1)
    best = float(norms.max())
    for k in np.argsort(norms)[-8:]:
        v = _ascend(m, b, dirs[k])
        best = max(best, float(np.linalg.norm(m @ v + b)))
    return best - 1.0


@dataclass(frozen=True, eq=False)
class AffineChannel:
    """Validated affine qubit channel ``v -> matrix @ v + offset``."""

    matrix: np.ndarray
    offset: np.ndarray = field(default_factory=lambda: np.zeros(3))
    label: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        b = np.array(self.offset, dtype=float).reshape(-1)
        if m.shape != (3, 3) or b.shape != (3,):
            raise InvalidChannelError(
                f"channel needs a 3x3 matrix and a 3-vector offset, got {m.shape} and {b.shape}"
            )
        if not (np.isfinite(m).all() and np.isfinite(b).all()):
            raise InvalidChannelError("channel entries must be finite")
        overflow = validate_image(m, b)
        if overflow > IMAGE_TOL:
            raise InvalidChannelError(
                f"channel image leaves the Bloch ball (overflow {overflow:.3e})",
                overflow=overflow,
            )
        m.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", b)

    def __call__(self, v):
        return apply(self, v)

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.tolist(),
            "offset": self.offset.tolist(),
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AffineChannel":
        try:
            return cls(d["matrix"], d.get("offset", [0.0, 0.0, 0.0]), d.get("label", ""))
        except KeyError as exc:
            raise InvalidChannelError(f"channel description lacks {exc}") from None


def apply(channel: AffineChannel, v) -> np.ndarray:
    v = as_points(v)
    return v @ channel.matrix.T + channel.offset


def load_channel(path) -> AffineChannel:
    with open(Path(path)) as fh:
        return AffineChannel.from_dict(json.load(fh))


def save_channel(channel: AffineChannel, path) -> None:
    Path(path).write_text(json.dumps(channel.to_dict(), indent=2) + "\n")


# -- builders -------------------------------------------------------------

def _unit_interval(name, value):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise InvalidChannelError(f"{name} must lie in [0, 1], got {value}")
    return value


def identity() -> AffineChannel:
    return AffineChannel(np.eye(3), np.zeros(3), "identity")


def depolarizing(t: float) -> AffineChannel:
    """Uniform shrink by ``t``; ``t = 1`` is the identity, ``t = 0`` erases."""
    t = _unit_interval("t", t)
    return AffineChannel(t * np.eye(3), np.zeros(3), f"depolarizing(t={t:g})")


def planar(tx: float, ty: float) -> AffineChannel:
    """Projection onto the equatorial disc, scaled by ``tx`` and ``ty``."""
    tx, ty = _unit_interval("tx", tx), _unit_interval("ty", ty)
    return AffineChannel(np.diag([tx, ty, 0.0]), np.zeros(3), f"planar(tx={tx:g},ty={ty:g})")


def amplitude_damping(gamma: float) -> AffineChannel:
    g = _unit_interval("gamma", gamma)
    s = math.sqrt(1.0 - g)
    return AffineChannel(
        np.diag([s, s, 1.0 - g]), np.array([0.0, 0.0, g]), f"amplitude_damping(gamma={g:g})"
    )


def phase_damping(lam: float) -> AffineChannel:
    lam = _unit_interval("lambda", lam)
    s = math.sqrt(1.0 - lam)
    return AffineChannel(np.diag([s, s, 1.0]), np.zeros(3), f"phase_damping(lambda={lam:g})")


def rotation(axis, angle: float) -> AffineChannel:
    """Unitary channel: rotation of the Bloch ball about ``axis`` by ``angle``."""
    axis = np.asarray(axis, dtype=float).reshape(3)
    n = np.linalg.norm(axis)
    if n == 0.0 or not np.isfinite(n):
        raise InvalidChannelError("rotation axis must be a nonzero finite vector")
    r = Rotation.from_rotvec(axis / n * float(angle)).as_matrix()
    return AffineChannel(r, np.zeros(3), f"rotation(angle={float(angle):g})")


BUILDERS = {
    "identity": identity,
    "depolarizing": depolarizing,
    "planar": planar,
    "amplitude_damping": amplitude_damping,
    "phase_damping": phase_damping,
    "rotation": rotation,
}


def build(name: str, **params) -> AffineChannel:
    """Construct a named channel; used by the command line.

    ``rotation`` takes ``axis`` as ``"x,y,z"`` and ``angle`` in radians.
    """
    key = name.replace("-", "_")
    if key not in BUILDERS:
        raise InvalidChannelError(f"unknown channel {name!r}; choose from {sorted(BUILDERS)}")
    if key == "rotation" and isinstance(params.get("axis"), str):
        params["axis"] = [float(c) for c in params["axis"].split(",")]
    if key == "phase_damping" and "lambda" in params:
        params["lam"] = params.pop("lambda")
    try:
        return BUILDERS[key](**params)
    except TypeError as exc:
        raise InvalidChannelError(f"bad parameters for {name}: {exc}") from None
