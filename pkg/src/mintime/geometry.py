"""Support-vector geometry for strictly convex compact sets.

State vectors live in R^n, support (co)vectors in its dual; both are plain
float64 arrays of shape ``(n,)``.  A strictly convex compact body is anything
exposing a single-valued contact function ``contact(p)`` returning the unique
boundary point that maximizes ``p . s`` over the body.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

__all__ = [
    "as_vector", "unit_support", "support_gap", "ball_contact",
    "moving_point_contact", "ConvexBody", "MovingBody",
    "BallBody", "PointBody", "MovingPointBody",
]

#: Unit support vectors are accepted as unit within this tolerance.
UNIT_TOL = 1e-12


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a finite float64 vector of shape (n,)."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size < 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise ValueError(f"expected dimension {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector entries must be finite")
    return v


def unit_support(p) -> np.ndarray:
    """Normalize a support vector; exact zero is rejected.

    Non-unit inputs are renormalized rather than rejected, since every solver
    renormalizes anyway.
    """
    p = as_vector(p)
    n = float(np.linalg.norm(p))
    if n == 0.0:
        raise ValueError("degenerate support vector")
    if abs(n - 1.0) <= UNIT_TOL:
        return p
    return p / n


@runtime_checkable
class ConvexBody(Protocol):
    """Strictly convex compact set given by its contact function."""

    def contact(self, p: np.ndarray) -> np.ndarray:
        """Boundary point maximizing ``p . s`` over the set (``p != 0``)."""
        ...


@runtime_checkable
class MovingBody(Protocol):
    """Time-varying strictly convex compact set with a known boundary speed."""

    speed_bound: float

    def contact_at(self, t: float, p: np.ndarray) -> np.ndarray: ...

    def velocity_at(self, t: float, p: np.ndarray) -> np.ndarray:
        """Time derivative of ``contact_at(., p)`` at ``t``."""
        ...


def ball_contact(center, radius: float, p) -> np.ndarray:
    """Contact point of a ball: ``center + radius * p / |p|``."""
    center = as_vector(center)
    if float(np.linalg.norm(np.asarray(p, dtype=float))) == 0.0:
        raise ValueError("degenerate support vector")
    if radius <= 0.0:
        raise ValueError("ball radius must be positive (strict convexity)")
    phat = unit_support(as_vector(p, center.size))
    return center + radius * phat


def support_gap(p, s, body: ConvexBody) -> float:
    """``p . (contact(p) - s)``; nonnegative whenever ``s`` is in the body."""
    p = as_vector(p)
    if float(np.linalg.norm(p)) == 0.0:
        raise ValueError("degenerate support vector")
    s = as_vector(s, p.size)
    return float(p @ (body.contact(p) - s))


def moving_point_contact(g0, gvel, t: float, p) -> np.ndarray:
    """Contact function of a moving singleton: ``g0 + t * gvel`` for any p."""
    g0 = as_vector(g0)
    gvel = as_vector(gvel, g0.size)
    if float(np.linalg.norm(np.asarray(p, dtype=float))) == 0.0:
        raise ValueError("degenerate support vector")
    return g0 + t * gvel


@dataclass(frozen=True, eq=False)
class BallBody:
    """Closed ball fixture; strictly convex for any positive radius."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vector(self.center))
        if not self.radius > 0.0:
            raise ValueError("ball radius must be positive (strict convexity)")
        self.center.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.center.size

    def contact(self, p: np.ndarray) -> np.ndarray:
        return ball_contact(self.center, self.radius, p)

    def sample_inside(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform-ish interior points, for support-inequality probes."""
        d = rng.standard_normal((count, self.dim))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        r = self.radius * rng.random(count) ** (1.0 / self.dim)
        return self.center + d * r[:, None]


@dataclass(frozen=True, eq=False)
class PointBody:
    """Singleton set; trivially strictly convex."""

    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", as_vector(self.point))
        self.point.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.point.size

    def contact(self, p: np.ndarray) -> np.ndarray:
        if float(np.linalg.norm(np.asarray(p, dtype=float))) == 0.0:
            raise ValueError("degenerate support vector")
        return self.point


@dataclass(frozen=True, eq=False)
class MovingPointBody:
    """Singleton moving with constant velocity along a straight line."""

    start: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "start", as_vector(self.start))
        object.__setattr__(self, "velocity", as_vector(self.velocity, self.start.size))
        self.start.setflags(write=False)
        self.velocity.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.start.size

    @property
    def speed_bound(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def contact_at(self, t: float, p: np.ndarray) -> np.ndarray:
        return moving_point_contact(self.start, self.velocity, t, p)

    def velocity_at(self, t: float, p: np.ndarray) -> np.ndarray:
        return self.velocity

    def frozen(self, t: float) -> PointBody:
        return PointBody(self.start + t * self.velocity)
