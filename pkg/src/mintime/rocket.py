"""Isotropic rocket benchmark plant.

A point mass in a viscous medium steered by a thrust that is free in
direction but bounded in magnitude: state ``(x, y, vx, vy)`` with

    xdot = vx,  ydot = vy,  vxdot = -vx + ux,  vydot = -vy + uy,
    ux^2 + uy^2 <= 1.

Everything needed by the solvers is available in closed form: the
fundamental matrix, the adjoint flow, the extremal control, and -- the
interesting part -- the reachable-set contact function, whose defining
integral reduces to elementary antiderivatives of 1/sqrt(quadratic) after
the substitution ``c = exp(-(t - tau))``.  The target is a point moving
with constant velocity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import LinearPlant
from .geometry import MovingPointBody, as_vector

__all__ = [
    "ROCKET_SPEED_BOUND", "rocket_matrix", "rocket_phi", "rocket_adjoint",
    "rocket_u_extremal", "rocket_contact", "contact_by_quadrature",
    "Scenario", "rocket_plant",
]

#: Global bound on |A s + u| while the velocity stays in the unit ball.
ROCKET_SPEED_BOUND = math.sqrt(5.0)

_A = np.array([
    [0.0, 0.0, 1.0, 0.0],
    [0.0, 0.0, 0.0, 1.0],
    [0.0, 0.0, -1.0, 0.0],
    [0.0, 0.0, 0.0, -1.0],
])
_A.setflags(write=False)


def rocket_matrix(t: float = 0.0) -> np.ndarray:
    """The (constant) system matrix."""
    return _A


def rocket_phi(t: float) -> np.ndarray:
    """Fundamental matrix ``expm(t A)`` in closed block form."""
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    e = math.exp(-t)
    g = 1.0 - e
    return np.array([
        [1.0, 0.0, g, 0.0],
        [0.0, 1.0, 0.0, g],
        [0.0, 0.0, e, 0.0],
        [0.0, 0.0, 0.0, e],
    ])


def rocket_adjoint(t: float, T: float, p) -> np.ndarray:
    """Adjoint flow ``p(t; T, p) = p expm((T - t) A)``, elementwise.

    Position components are invariant; velocity components relax toward the
    position ones at unit rate (in backward time).
    """
    p = as_vector(p, 4)
    e = math.exp(-(T - t))
    g = 1.0 - e
    return np.array([
        p[0], p[1],
        p[2] * e + p[0] * g,
        p[3] * e + p[1] * g,
    ])


def rocket_u_extremal(p) -> np.ndarray:
    """Thrust maximizing ``p . u``: the unit vector along (p3, p4)."""
    p = as_vector(p, 4)
    n = math.hypot(p[2], p[3])
    if n == 0.0:
        raise ValueError("extremal control undefined")
    return np.array([0.0, 0.0, p[2] / n, p[3] / n])


# ---------------------------------------------------------------------------
# Closed-form contact function
# ---------------------------------------------------------------------------
#
# With c = exp(-(T - tau)) the extremal thrust direction at tau is
# u(c) = (a + b c)/|a + b c| for a = (p1, p2), b = (p3 - p1, p4 - p2), and
#
#   velocities(T) = c0 (v0, 0) + J0,          J0  = int_{c0}^{1} u(c) dc
#   positions(T)  = (1 - c0)(v0, 0) + Jm1 - J0, Jm1 = int_{c0}^{1} u(c)/c dc
#
# where c0 = exp(-T).  Writing Q(c) = |a + b c|^2 = alpha + 2 beta c +
# deltab c^2, both integrals are combinations of int dc/sqrt(Q),
# int c dc/sqrt(Q), and int dc/(c sqrt(Q)), which have logarithmic /
# inverse-hyperbolic antiderivatives.  Branches: a zero linear part, a zero
# constant part, or collinear a, b (where the thrust direction flips sign at
# an interior point) are handled piecewise.

#: Thrust directions are treated as constant-up-to-a-sign-flip when the
#: normalized 2-d cross product of a and b is below this.
_COLLINEAR_TOL = 1e-14


def _segment_integrals_scalar(a1: float, a2: float, b1: float, b2: float,
                              c0: float):
    """(j0x, j0y, jm1x, jm1y) for u(c) = (a + b c)/|a + b c| over [c0, 1].

    The discriminant of Q(c) = |a + b c|^2 is the squared 2-d cross product
    of a and b; computing it that way (rather than as alpha delta - beta^2,
    which is catastrophic cancellation near collinearity) keeps the
    logarithmic terms accurate for the almost-collinear vectors that arise
    along boost-flowed adjoints.
    """
    alpha = a1 * a1 + a2 * a2
    beta = a1 * b1 + a2 * b2
    deltab = b1 * b1 + b2 * b2
    cross = a1 * b2 - a2 * b1
    disc = cross * cross

    def constant_dir(ux: float, uy: float, sign: float):
        span = sign * (1.0 - c0)
        logspan = sign * (-math.log(c0))
        return ux * span, uy * span, ux * logspan, uy * logspan

    if deltab <= 1e-300 or deltab <= 1e-32 * alpha:
        n = math.sqrt(alpha)
        return constant_dir(a1 / n, a2 / n, 1.0)
    if alpha <= 1e-300 or alpha <= 1e-32 * deltab:
        n = math.sqrt(deltab)
        return constant_dir(b1 / n, b2 / n, 1.0)
    if abs(cross) <= _COLLINEAR_TOL * math.sqrt(alpha * deltab):
        # u(c) = sign(1 + lam c) * a/|a|, flipping at c* = -1/lam
        lam = beta / alpha
        n = math.sqrt(alpha)
        ux, uy = a1 / n, a2 / n
        if lam >= 0.0:
            return constant_dir(ux, uy, 1.0)
        cstar = -1.0 / lam
        if cstar >= 1.0:
            return constant_dir(ux, uy, 1.0)
        if cstar <= c0:
            return constant_dir(ux, uy, -1.0)
        span = (cstar - c0) - (1.0 - cstar)
        logspan = 2.0 * math.log(cstar) - math.log(c0)
        return ux * span, uy * span, ux * logspan, uy * logspan

    sqrt_d = math.sqrt(deltab)
    sqrt_a = math.sqrt(alpha)
    sqrt_disc = abs(cross)

    def q_of(c: float) -> float:
        # squared norm directly: exact nonnegativity near the minimum
        wx = a1 + b1 * c
        wy = a2 + b2 * c
        return wx * wx + wy * wy

    def f1(c: float) -> float:
        return math.asinh((deltab * c + beta) / sqrt_disc) / sqrt_d

    def fc(c: float) -> float:
        return math.sqrt(q_of(c)) / deltab - (beta / deltab) * f1(c)

    def fm1(c: float) -> float:
        lin = alpha + beta * c
        root = sqrt_a * math.sqrt(q_of(c))
        if lin >= 0.0:
            arg = (2.0 * lin + 2.0 * root) / c
        else:
            # rationalized form, stable past the near-zero of Q
            arg = 2.0 * c * disc / (root - lin)
        return -math.log(arg) / sqrt_a

    e1 = f1(1.0) - f1(c0)
    ec = fc(1.0) - fc(c0)
    em1 = fm1(1.0) - fm1(c0)
    return (a1 * e1 + b1 * ec, a2 * e1 + b2 * ec,
            a1 * em1 + b1 * e1, a2 * em1 + b2 * e1)


def _segment_integrals(a: np.ndarray, b: np.ndarray, c0: float):
    """Array wrapper around the scalar core (kept for oracles and tests)."""
    j0x, j0y, jm1x, jm1y = _segment_integrals_scalar(
        float(a[0]), float(a[1]), float(b[0]), float(b[1]), c0)
    return np.array([j0x, j0y]), np.array([jm1x, jm1y])


def _assemble_contact(v0: float, t: float, j0: np.ndarray,
                      jm1: np.ndarray) -> np.ndarray:
    c0 = math.exp(-t)
    return np.array([
        (1.0 - c0) * v0 + jm1[0] - j0[0],
        jm1[1] - j0[1],
        c0 * v0 + j0[0],
        j0[1],
    ])


def rocket_contact(v0: float, t: float, p, validate: bool = False) -> np.ndarray:
    """Reachable-set contact point ``s_R(t)(p)`` in closed form.

    With ``validate=True`` the elementary antiderivatives are spot-checked
    against a numerical quadrature of the defining integral; a mismatch
    falls back to the quadrature result and emits a warning.
    """
    p1, p2, p3, p4 = float(p[0]), float(p[1]), float(p[2]), float(p[3])
    if p1 == 0.0 and p2 == 0.0 and p3 == 0.0 and p4 == 0.0:
        raise ValueError("degenerate support vector")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if t == 0.0:
        return np.array([0.0, 0.0, v0, 0.0])
    c0 = math.exp(-t)
    j0x, j0y, jm1x, jm1y = _segment_integrals_scalar(
        p1, p2, p3 - p1, p4 - p2, c0)
    out = np.array([
        (1.0 - c0) * v0 + jm1x - j0x,
        jm1y - j0y,
        c0 * v0 + j0x,
        j0y,
    ])
    if validate or not (math.isfinite(j0x) and math.isfinite(j0y)
                        and math.isfinite(jm1x) and math.isfinite(jm1y)):
        ref = contact_by_quadrature(v0, t, p)
        if not np.all(np.isfinite(out)) or float(np.max(np.abs(out - ref))) > 1e-8:
            warnings.warn("closed-form contact failed residual check; "
                          "using quadrature", RuntimeWarning)
            return ref
    return out


def contact_by_quadrature(v0: float, t: float, p) -> np.ndarray:
    """Adaptive-quadrature evaluation of the contact integral (oracle)."""
    from scipy.integrate import quad
    p = as_vector(p, 4)
    a = p[:2].copy()
    b = p[2:] - p[:2]
    c0 = math.exp(-t)
    beta = float(a @ b)
    deltab = float(b @ b)
    points = None
    if deltab > 0.0:
        # split where |a + b c| is smallest (fastest integrand variation)
        c_min = -beta / deltab
        if c0 < c_min < 1.0:
            points = [c_min]

    def u_comp(c: float, k: int) -> float:
        w = a + b * c
        n = math.hypot(w[0], w[1])
        return w[k] / n if n > 0.0 else 0.0

    j0 = np.array([
        quad(u_comp, c0, 1.0, args=(k,), points=points, limit=400)[0]
        for k in range(2)
    ])
    jm1 = np.array([
        quad(lambda c, k=k: u_comp(c, k) / c, c0, 1.0, points=points,
             limit=400)[0]
        for k in range(2)
    ])
    return _assemble_contact(v0, t, j0, jm1)


# ---------------------------------------------------------------------------
# Benchmark scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """One benchmark instance: initial speed and target motion parameters.

    The rocket starts at the origin with velocity ``(v0, 0)``; the target
    point starts at ``(s1, s2)`` with constant velocity ``(v1, v2)`` (and
    that velocity must be matched at interception).
    """

    v0: float
    s1: float
    s2: float
    v1: float
    v2: float

    def __post_init__(self):
        if not 0.0 <= self.v0 < 1.0:
            raise ValueError("v0 must lie in [0, 1)")
        if self.v1 ** 2 + self.v2 ** 2 >= 1.0:
            raise ValueError("target speed must satisfy v1^2 + v2^2 < 1")

    @property
    def target_speed(self) -> float:
        return math.hypot(self.v1, self.v2)

    def plant(self) -> LinearPlant:
        return rocket_plant(self.v0)

    def target(self) -> MovingPointBody:
        return MovingPointBody(
            start=np.array([self.s1, self.s2, self.v1, self.v2]),
            velocity=np.array([self.v1, self.v2, 0.0, 0.0]),
        )

    def problem(self, compiled: bool = True) -> tuple[LinearPlant, MovingPointBody]:
        """Plant/target pair, with the jitted boost search attached when
        available (the generic integrator is the fallback)."""
        plant = self.plant()
        target = self.target()
        if compiled:
            from . import _kernels
            if _kernels.HAVE_NUMBA:
                g1, g2, gv1, gv2 = self.s1, self.s2, self.v1, self.v2

                def fast_boost(t, p, s, tau, t_cap):
                    return _kernels.rocket_boost(
                        float(t), np.asarray(p, dtype=float),
                        np.asarray(s, dtype=float), float(tau),
                        g1, g2, gv1, gv2, float(t_cap))

                plant.fast_boost = fast_boost
        return plant, target

    def initial_support(self) -> np.ndarray:
        """Unit support vector pointing from the initial state to the target."""
        raw = np.array([self.s1, self.s2, self.v1 - self.v0, self.v2])
        n = float(np.linalg.norm(raw))
        if n == 0.0:
            raise ValueError("target coincides with the initial state "
                             "(minimum time is zero)")
        return raw / n

    def csv_row(self) -> str:
        return ",".join(f"{x:.17g}" for x in
                        (self.v0, self.s1, self.s2, self.v1, self.v2))

    @staticmethod
    def from_csv_row(row: str) -> "Scenario":
        parts = [float(x) for x in row.strip().split(",")]
        if len(parts) != 5:
            raise ValueError(f"expected 5 scenario fields, got {len(parts)}")
        return Scenario(*parts)


def rocket_plant(v0: float) -> LinearPlant:
    """Plant bundle for initial speed v0 along the x axis."""
    if not 0.0 <= v0 < 1.0:
        raise ValueError("v0 must lie in [0, 1)")
    return LinearPlant(
        dim=4,
        a_matrix=rocket_matrix,
        u_extremal=rocket_u_extremal,
        s0=np.array([0.0, 0.0, v0, 0.0]),
        speed_bound=ROCKET_SPEED_BOUND,
        analytic_contact=lambda t, p: rocket_contact(v0, t, p),
        analytic_adjoint=rocket_adjoint,
    )
