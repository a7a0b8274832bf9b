"""
Distances, divergences and dual (Legendre) coordinates on the Bloch ball.

The divergence ``D(a || b) = Tr rho_a (log rho_a - log rho_b)`` is the Bregman
divergence of the potential ``phi = -S``.  Its gradient map

    u = grad phi(v) = artanh(r) / r * v

sends the open ball onto all of R^3; the conjugate potential there is
``phi*(u) = log(2 cosh |u|)`` and ``D(a || b) = phi(a) + phi*(u_b) - a . u_b``.

Every function broadcasts over leading axes of its ``(..., 3)`` inputs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    LOG2,
    PURE_GUARD,
    BlochVector,
    PurityError,
    SingularLogarithmError,
    artanh_ratio,
    as_points,
    density_matrices,
    potential,
    radius,
)

PURE_TOL = 1e-9
#: divergences in ``[-NEG_CLAMP, 0)`` are rounding noise and snap to 0
NEG_CLAMP = 1e-12


@dataclass(frozen=True)
class DualCoordinates:
    """Gradient-map image ``(u, v, w)`` of an interior Bloch vector."""

    u: float
    v: float
    w: float

    def __post_init__(self):
        for name in ("u", "v", "w"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not np.isfinite([self.u, self.v, self.w]).all():
            raise ValueError("dual coordinates must be finite")

    @classmethod
    def from_array(cls, a) -> "DualCoordinates":
        u, v, w = np.asarray(a, dtype=float).reshape(3)
        return cls(u, v, w)

    @property
    def s(self) -> float:
        return float(radius(self.array))

    @property
    def array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w])

    def __array__(self, dtype=None, copy=None):
        return self.array if dtype is None else self.array.astype(dtype)


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def _clamp(d):
    d = np.asarray(d, dtype=float)
    d = np.where((d < 0) & (d >= -NEG_CLAMP), 0.0, d)
    return _scalar(d)


def _require_pure(*vs):
    for v in vs:
        if np.any(np.abs(radius(v) - 1.0) >= PURE_TOL):
            raise PurityError("pure states required (|r - 1| < 1e-9)")


def _require_interior(b, what):
    if np.any(radius(b) > 1.0 - PURE_GUARD):
        raise SingularLogarithmError(what)


def dot(a, b):
    return _scalar(np.sum(np.asarray(a) * np.asarray(b), axis=-1))


# -- pure-state distances -------------------------------------------------

def trace_inner(a, b):
    """``Tr(rho_a rho_b) = (1 + a.b) / 2``."""
    a, b = as_points(a), as_points(b)
    return _scalar(0.5 * (1.0 + np.sum(a * b, axis=-1)))


def euclidean(a, b):
    a, b = as_points(a), as_points(b)
    return _scalar(radius(a - b))


def geodesic(a, b):
    """Central angle between two pure states, in ``[0, pi]``.

    Evaluated as ``2 atan2(|a - b|, |a + b|)``, which is ``arccos(a . b)``
    for unit vectors but keeps full precision near 0 and pi.
    """
    a, b = as_points(a), as_points(b)
    _require_pure(a, b)
    return _scalar(2.0 * np.arctan2(radius(a - b), radius(a + b)))


def fubini_study(a, b):
    """Fubini-Study distance ``arccos sqrt(Tr rho sigma)``, in ``[0, pi/2]``.

    For pure qubits ``sqrt(Tr rho sigma) = |a + b| / 2`` and
    ``sqrt(1 - Tr rho sigma) = |a - b| / 2``; the angle is taken with atan2
    of that pair for accuracy.
    """
    a, b = as_points(a), as_points(b)
    _require_pure(a, b)
    return _scalar(np.arctan2(radius(a - b), radius(a + b)))


def bures(a, b):
    """Bures distance ``sqrt(1 - Tr rho sigma)`` between pure states."""
    a, b = as_points(a), as_points(b)
    _require_pure(a, b)
    t = 0.5 * (1.0 - np.sum(a * b, axis=-1))
    return _scalar(np.sqrt(np.maximum(t, 0.0)))


# -- divergence -----------------------------------------------------------

def _plogp_trace(rho_eigs):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.sum(np.where(rho_eigs > 0, rho_eigs * np.log(np.where(rho_eigs > 0, rho_eigs, 1.0)), 0.0), axis=-1)


def divergence_matrix(a, b):
    """Quantum divergence from numerically diagonalised density matrices.

    ``Tr rho_a log rho_a`` uses the eigenvalues of ``rho_a`` (``0 log 0 = 0``);
    ``Tr rho_a log rho_b`` expands ``rho_a`` in the eigenbasis of ``rho_b``.
    This route never touches the Bloch-coordinate closed form and serves as
    its independent check.
    """
    a, b = as_points(a), as_points(b)
    _require_interior(b, "divergence undefined at pure second argument")
    a, b = np.broadcast_arrays(a, b)
    ra, rb = density_matrices(a), density_matrices(b)
    ea = np.clip(np.linalg.eigvalsh(ra), 0.0, None)
    eb, vb = np.linalg.eigh(rb)
    # <b_k | rho_a | b_k>
    diag = np.einsum("...ik,...ij,...jk->...k", vb.conj(), ra, vb).real
    cross = np.sum(diag * np.log(eb), axis=-1)
    return _clamp(_plogp_trace(ea) - cross)


def divergence_closed(a, b):
    """Closed-form quantum divergence in Bloch coordinates.

    ``D(a || b) = -S(a) - (1/2) log((1 - rb^2) / 4) - artanh(rb)/rb * (a . b)``.
    At ``b = 0`` the coefficient takes its limit 1, giving
    ``D(a || 0) = log 2 - S(a)``.
    """
    a, b = as_points(a), as_points(b)
    rb = radius(b)
    _require_interior(b, "divergence undefined at pure second argument")
    half_log = 0.5 * np.log1p(-rb * rb) - LOG2
    d = potential(a) - half_log - artanh_ratio(rb) * np.sum(a * b, axis=-1)
    return _clamp(d)


divergence = divergence_closed


# -- Legendre dual --------------------------------------------------------

def grad_potential(v) -> np.ndarray:
    """Dual coordinates ``artanh(r)/r * v``; the origin maps to the origin."""
    v = as_points(v)
    r = radius(v)
    if np.any(r >= 1.0 - PURE_GUARD):
        raise SingularLogarithmError("dual coordinates diverge on the sphere")
    return v * np.asarray(artanh_ratio(r))[..., None]


def _tanh_ratio(s):
    s = np.asarray(s, dtype=float)
    small = s < 1e-4
    safe = np.where(small, 1.0, s)
    s2 = s * s
    return np.where(small, 1.0 - s2 / 3.0 + 2.0 * s2 * s2 / 15.0, np.tanh(safe) / safe)


def inverse_grad(d) -> np.ndarray:
    """Bloch vector ``tanh(s)/s * d`` whose dual coordinates are ``d``."""
    d = np.asarray(d, dtype=float)
    if not np.isfinite(d).all():
        raise ValueError("dual coordinates must be finite")
    return d * _tanh_ratio(radius(d))[..., None]


def conjugate_potential(d):
    """``phi*(u) = log(2 cosh |u|)``, evaluated overflow-free."""
    s = radius(np.asarray(d, dtype=float))
    return _scalar(s + np.log1p(np.exp(-2.0 * s)))


def divergence_dual(a, d):
    """``D(a || b)`` with the second state given by its dual coordinates."""
    a = as_points(a)
    d = np.asarray(d, dtype=float)
    val = potential(a) + conjugate_potential(d) - np.sum(a * d, axis=-1)
    return _clamp(val)


def as_bloch(v) -> BlochVector:
    return v if isinstance(v, BlochVector) else BlochVector.from_array(v)
