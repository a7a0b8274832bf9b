"""
State algebra for a single qubit in Bloch coordinates.

A state is a point ``(x, y, z)`` of the closed unit ball; the density matrix
is ``(I + x X + y Y + z Z) / 2``.  All functions accept either a
:class:`BlochVector` or an array of shape ``(3,)`` / ``(..., 3)`` and work
elementwise over leading axes.  Logarithms are natural (nats).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

LOG2 = math.log(2.0)

#: slack allowed outside the closed unit ball
BALL_TOL = 1e-12
#: points with ``r >= 1 - PURE_GUARD`` have no finite matrix logarithm
PURE_GUARD = 1e-12

PAULI = np.array(
    [[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=complex
)
SWAP = np.array([[0, 1], [1, 0]], dtype=complex)


class OutOfBallError(ValueError):
    """A Bloch vector lies outside the closed unit ball."""


class SingularLogarithmError(ValueError):
    """A logarithm of a pure or near-pure state was requested."""


class PurityError(ValueError):
    """An operation defined only on pure states got a mixed one."""


def radius(v) -> np.ndarray:
    """Euclidean norm of Bloch vectors along the last axis.

    This is the only place a Bloch radius is computed, so the same
    coordinates always give bit-identical radii.
    """
    v = np.asarray(v, dtype=float)
    x, y, z = v[..., 0], v[..., 1], v[..., 2]
    return np.sqrt(x * x + y * y + z * z)


@dataclass(frozen=True)
class BlochVector:
    """A point of the closed Bloch ball."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not np.isfinite([self.x, self.y, self.z]).all():
            raise OutOfBallError("non-finite Bloch coordinates")
        if self.r > 1.0 + BALL_TOL:
            raise OutOfBallError(f"Bloch vector outside the ball (r = {self.r!r})")

    @classmethod
    def from_array(cls, a) -> "BlochVector":
        x, y, z = np.asarray(a, dtype=float).reshape(3)
        return cls(x, y, z)

    @property
    def r(self) -> float:
        return float(radius(self.array))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def is_pure(self) -> bool:
        return abs(self.r - 1.0) < 1e-9

    def __array__(self, dtype=None, copy=None):
        return self.array if dtype is None else self.array.astype(dtype)

    def __iter__(self):
        return iter((self.x, self.y, self.z))


VectorLike = Union[BlochVector, np.ndarray, "list[float]", "tuple[float, float, float]"]


def as_points(v, *, strict: bool = True) -> np.ndarray:
    """Coerce ``v`` to a float array of shape ``(..., 3)``.

    With ``strict`` (default) anything outside the closed ball beyond
    :data:`BALL_TOL` raises :class:`OutOfBallError`.
    """
    a = np.asarray(v, dtype=float)
    if a.shape[-1:] != (3,):
        raise ValueError(f"expected trailing dimension 3, got shape {a.shape}")
    if strict:
        if not np.isfinite(a).all():
            raise OutOfBallError("non-finite Bloch coordinates")
        r = radius(a)
        if np.any(r > 1.0 + BALL_TOL):
            raise OutOfBallError(
                f"Bloch vector outside the ball (max r = {float(np.max(r))!r})"
            )
    return a


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated 2x2 qubit density matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError(f"density matrix must be 2x2, got {m.shape}")
        if abs(m[1, 0] - np.conj(m[0, 1])) > 1e-14 or abs(m[0, 0].imag) > 1e-14 \
                or abs(m[1, 1].imag) > 1e-14:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > 1e-14:
            raise ValueError(f"density matrix trace is {np.trace(m).real!r}, not 1")
        if np.linalg.eigvalsh(m).min() < -1e-12:
            raise ValueError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """``rho = U diag(lambda1, lambda2) U*`` with ``lambda1 >= lambda2``.

    ``degenerate`` marks the maximally mixed state, where any basis works
    and ``unitary`` is the identity.
    """

    lambda1: float
    lambda2: float
    unitary: np.ndarray
    degenerate: bool = False

    def reconstruct(self) -> np.ndarray:
        u = self.unitary
        return u @ np.diag([self.lambda1, self.lambda2]) @ u.conj().T

    @property
    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        u = self.unitary
        return tuple(np.outer(u[:, k], u[:, k].conj()) for k in range(2))


def density_matrices(v) -> np.ndarray:
    """Unvalidated batch version of :func:`from_bloch`, shape ``(..., 2, 2)``."""
    a = as_points(v)
    x, y, z = a[..., 0], a[..., 1], a[..., 2]
    out = np.empty(a.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = (1 + z) / 2
    out[..., 0, 1] = (x - 1j * y) / 2
    out[..., 1, 0] = (x + 1j * y) / 2
    out[..., 1, 1] = (1 - z) / 2
    return out


def from_bloch(v: VectorLike) -> DensityMatrix:
    """Density matrix ``[[1+z, x-iy], [x+iy, 1-z]] / 2`` of a Bloch vector."""
    return DensityMatrix(density_matrices(as_points(v).reshape(3)))


def to_bloch(rho) -> BlochVector:
    """Inverse of :func:`from_bloch`."""
    m = rho.matrix if isinstance(rho, DensityMatrix) else DensityMatrix(rho).matrix
    return BlochVector(2 * m[1, 0].real, 2 * m[1, 0].imag, (m[0, 0] - m[1, 1]).real)


def eigenvalues(v: VectorLike):
    """Eigenvalues ``((1 + r)/2, (1 - r)/2)``, largest first."""
    r = np.minimum(radius(as_points(v)), 1.0)
    lam1, lam2 = (1 + r) / 2, (1 - r) / 2
    if np.ndim(r) == 0:
        return float(lam1), float(lam2)
    return lam1, lam2


def spectral(v: VectorLike) -> SpectralDecomposition:
    """Eigendecomposition with the explicit closed-form unitary.

    For ``(x, y) != (0, 0)`` the columns of ``U`` are the normalized
    eigenvectors ``((x-iy)/rho_xy sqrt(r+z), sqrt(r-z))`` and
    ``((x-iy)/rho_xy sqrt(r-z), -sqrt(r+z))`` over ``sqrt(2r)``.  On the z axis
    ``U`` is the identity (z > 0) or the basis swap (z < 0) so that
    ``lambda1`` always belongs to the ``+r`` eigenvector.
    """
    x, y, z = as_points(v).reshape(3)
    r = min(float(radius(np.array([x, y, z]))), 1.0)
    lam1, lam2 = (1 + r) / 2, (1 - r) / 2
    if r == 0.0:
        return SpectralDecomposition(0.5, 0.5, np.eye(2, dtype=complex), degenerate=True)
    rho_xy = math.hypot(x, y)
    if rho_xy == 0.0:
        u = np.eye(2, dtype=complex) if z >= 0 else SWAP.copy()
        return SpectralDecomposition(lam1, lam2, u)
    # r+z and r-z without cancellation: (r+z)(r-z) = x^2 + y^2
    if z >= 0:
        rpz = r + z
        rmz = rho_xy * rho_xy / rpz
    else:
        rmz = r - z
        rpz = rho_xy * rho_xy / rmz
    phase = complex(x, -y) / rho_xy
    s = 1.0 / math.sqrt(2.0 * r)
    u = s * np.array(
        [
            [phase * math.sqrt(rpz), phase * math.sqrt(rmz)],
            [math.sqrt(rmz), -math.sqrt(rpz)],
        ],
        dtype=complex,
    )
    return SpectralDecomposition(lam1, lam2, u)


def _log_half_one_minus(r):
    """``log((1 - r) / 2)`` accurate for ``r`` near 1."""
    return np.log1p(-r) - LOG2


def artanh_ratio(r):
    """``artanh(r) / r``, equal to ``(log(1+r) - log(1-r)) / (2r)``, with value 1 at 0."""
    r = np.asarray(r, dtype=float)
    small = r < 1e-4
    safe = np.where(small, 0.5, r)
    r2 = r * r
    out = np.where(small, 1.0 + r2 / 3.0 + r2 * r2 / 5.0, np.arctanh(safe) / safe)
    return out if out.ndim else float(out)


def log_density(v: VectorLike) -> np.ndarray:
    """Matrix logarithm ``log rho`` of a mixed state, shape ``(..., 2, 2)``.

    Uses ``log rho = (1/2) log(lambda1 lambda2) I + artanh(r)/r (x X + y Y + z Z)``,
    which is the spectral formula with the eigenprojectors written out.

    Raises
    ------
    SingularLogarithmError
        If ``r >= 1 - 1e-12``.
    """
    a = as_points(v)
    r = radius(a)
    if np.any(r >= 1.0 - PURE_GUARD):
        raise SingularLogarithmError("log of a pure or near-pure state is unbounded")
    half_log_det = 0.5 * (np.log1p(r) + np.log1p(-r)) - LOG2
    c = np.asarray(artanh_ratio(r))
    out = np.einsum("...k,kij->...ij", a * c[..., None], PAULI)
    out[..., 0, 0] += half_log_det
    out[..., 1, 1] += half_log_det
    return out


def entropy(v: VectorLike):
    """Von Neumann entropy in nats, with ``0 log 0 = 0``."""
    r = np.minimum(radius(as_points(v)), 1.0)
    lam1 = (1 + r) / 2
    lam2 = (1 - r) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        t2 = np.where(lam2 > 0, lam2 * _log_half_one_minus(r), 0.0)
    out = -(lam1 * (np.log1p(r) - LOG2)) - t2 + 0.0
    return out if np.ndim(out) else float(out)


def potential(v: VectorLike):
    """Convex potential ``-S``: ``-log 2`` at the center, 0 on the sphere."""
    s = entropy(v)
    return -s
