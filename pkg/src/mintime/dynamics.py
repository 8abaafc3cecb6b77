"""Linear plants, extremal trajectories, and the fixed-step RK4 machinery.

A plant is the data of a time-varying linear system ``sdot = A(t) s + u``
with a compact control range, exposed through the extremal control map
``u_E(p)`` (the maximizer of ``p . u``) and optional closed forms.  The
boundary of the reachable set is parameterized by support vectors: flowing
the adjoint ``pdot = -p A`` backward from ``(t, p)`` and then rolling the
state forward under ``u_E(p(.))`` lands exactly on the contact point
``s_R(t)(p)``.

The two integrators implement that parameterization (`rk4_contact`) and the
forward search for the boosting time at which the separating tangent
hyperplane collapses (`rk4_boost`).  Both use classic fixed-step RK4 so that
instrumentation counters map one-to-one onto integration spans.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .counters import RunCounters
from .estimates import BodyPair
from .geometry import MovingBody, as_vector, unit_support

__all__ = [
    "LinearPlant", "IntegratorConfig", "ReachEngine", "FrozenReach",
    "FrozenTarget", "frozen_pair", "ball_plant", "rk4_contact", "rk4_boost",
    "adjoint_flow_const", "rho_lower_time_derivative", "BoostDiverged",
]


class BoostDiverged(RuntimeError):
    """The boost search exceeded its time cap without a sign change."""


@dataclass(eq=False)
class LinearPlant:
    """Bundle describing one controlled linear system.

    a_matrix(t) returns the n-by-n system matrix; u_extremal(p) the control
    maximizing ``p . u`` over the admissible range (positively homogeneous
    in p); speed_bound is a global bound on ``|A s + u|`` along admissible
    trajectories.  Closed forms, when known, unlock the analytic contact
    engine and exact adjoint flows.
    """

    dim: int
    a_matrix: Callable[[float], np.ndarray]
    u_extremal: Callable[[np.ndarray], np.ndarray]
    s0: np.ndarray
    speed_bound: float
    analytic_contact: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    analytic_adjoint: Optional[Callable[[float, float, np.ndarray], np.ndarray]] = None
    #: optional compiled boost search with the same contract as rk4_boost,
    #: called as fast_boost(t, p, s, tau, t_cap) -> (t, p, s, span, diverged)
    fast_boost: Optional[Callable] = None

    def __post_init__(self):
        self.s0 = as_vector(self.s0, self.dim)
        self.s0.setflags(write=False)


@dataclass(frozen=True)
class IntegratorConfig:
    """Fixed RK4 step ``tau`` and an optional absolute time cap for the
    boost search."""

    tau: float
    t_max: Optional[float] = None

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")


def ball_plant(dim: int, s0=None) -> LinearPlant:
    """Integrator-free fixture: ``A = 0`` with a unit-ball control range.

    Its reachable set at time t is the ball of radius t around s0, so every
    quantity has a closed form.
    """
    s0 = np.zeros(dim) if s0 is None else as_vector(s0, dim)
    zero = np.zeros((dim, dim))

    def contact(t: float, p: np.ndarray) -> np.ndarray:
        if t == 0.0:
            return s0.copy()
        return s0 + t * unit_support(p)

    return LinearPlant(
        dim=dim,
        a_matrix=lambda t: zero,
        u_extremal=lambda p: unit_support(p),
        s0=s0,
        speed_bound=1.0,
        analytic_contact=contact,
        analytic_adjoint=lambda t, T, p: as_vector(p, dim).copy(),
    )


# ---------------------------------------------------------------------------
# RK4 integrators
# ---------------------------------------------------------------------------

def _adjoint_step_back(a_matrix, t: float, h: float, p: np.ndarray) -> np.ndarray:
    """One backward RK4 step of ``pdot = -p A`` from t to t - h."""
    k1 = -(p @ a_matrix(t))
    k2 = -((p - 0.5 * h * k1) @ a_matrix(t - 0.5 * h))
    k3 = -((p - 0.5 * h * k2) @ a_matrix(t - 0.5 * h))
    k4 = -((p - h * k3) @ a_matrix(t - h))
    return p - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _u_along_flow(plant: LinearPlant, p: np.ndarray, pdot: np.ndarray,
                  h: float) -> np.ndarray:
    """Extremal control at p, selected along the adjoint flow when abnormal.

    At isolated points the maximizer of ``p . u`` may be set-valued (the
    plant raises); the integrand is then defined a.e. by the control just
    ahead along the flow, so re-evaluate at an infinitesimally advanced
    adjoint.
    """
    try:
        return plant.u_extremal(p)
    except ValueError:
        return plant.u_extremal(p + (h * 2.0 ** -30) * pdot)


def _joint_step_forward(plant: LinearPlant, t: float, h: float,
                        p: np.ndarray, s: np.ndarray):
    """One forward RK4 step of the coupled adjoint + extremal state system."""
    A0 = plant.a_matrix(t)
    Ah = plant.a_matrix(t + 0.5 * h)
    A1 = plant.a_matrix(t + h)
    k1p = -(p @ A0)
    k2p = -((p + 0.5 * h * k1p) @ Ah)
    k3p = -((p + 0.5 * h * k2p) @ Ah)
    k4p = -((p + h * k3p) @ A1)
    k1s = A0 @ s + _u_along_flow(plant, p, k1p, h)
    k2s = Ah @ (s + 0.5 * h * k1s) + _u_along_flow(plant, p + 0.5 * h * k1p, k2p, h)
    k3s = Ah @ (s + 0.5 * h * k2s) + _u_along_flow(plant, p + 0.5 * h * k2p, k3p, h)
    k4s = A1 @ (s + h * k3s) + _u_along_flow(plant, p + h * k3p, k4p, h)
    p_next = p + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    s_next = s + (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    return p_next, s_next


def rk4_contact(plant: LinearPlant, cfg: IntegratorConfig, t: float, p,
                counters: RunCounters | None = None) -> np.ndarray:
    """Approximate the reachable-set contact point ``s_R(t)(p)``.

    Backward RK4 of the adjoint from (t, p) to 0, then forward RK4 of the
    coupled state + adjoint system under the extremal control.  The final
    partial step uses the exact remainder, so t need not be a multiple of
    tau.  Adds the span t to the contact-integration counter.
    """
    p = as_vector(p, plant.dim)
    if float(np.linalg.norm(p)) == 0.0:
        raise ValueError("degenerate support vector")
    if t < 0.0:
        raise ValueError("t must be nonnegative")
    if counters is not None:
        counters.i_s += t
    tau = cfg.tau
    T = t
    s = plant.s0.copy()
    p = p.copy()
    while t > 0.0:
        h = tau if t >= tau else t
        p = _adjoint_step_back(plant.a_matrix, t, h, p)
        t -= h
    t = 0.0
    while t < T:
        # full step while at least one full step remains, else the remainder
        h = tau if T - t >= tau else T - t
        p, s = _joint_step_forward(plant, t, h, p, s)
        t += h
    return s


def rk4_boost(plant: LinearPlant, target: MovingBody, cfg: IntegratorConfig,
              t: float, p, s, counters: RunCounters | None = None,
              t_max: Optional[float] = None):
    """Forward search for the boosting time along the adjoint flow.

    Starting from ``s = s_R(t)(p)``, integrates the coupled adjoint + state
    system with fixed step tau while the flowed support vector still
    separates the bodies (``p . (s_G(t)(-p) - s) > 0``), and returns the
    last triple ``(t, p, s)`` seen *before* the sign condition failed -- the
    step-quantized approximation of the boosting time, the flowed support
    vector, and the contact point there.  If the initial triple already
    violates the condition, the inputs are returned unchanged.

    Counts one boost evaluation and adds the integrated span to the boost
    counter.
    """
    p = as_vector(p, plant.dim).copy()
    s = as_vector(s, plant.dim).copy()
    if counters is not None:
        counters.n_f += 1
    cap = t_max if t_max is not None else cfg.t_max
    tau = cfg.tau
    t_hold, p_hold, s_hold = t, p.copy(), s.copy()
    span = 0.0
    while float(p @ (target.contact_at(t, -p) - s)) > 0.0:
        t_hold, p_hold, s_hold = t, p.copy(), s.copy()
        if cap is not None and t + tau > cap:
            if counters is not None:
                counters.i_f += span
            raise BoostDiverged(
                f"boosting diverged: no sign change up to t={t!r}")
        p, s = _joint_step_forward(plant, t, tau, p, s)
        t += tau
        span += tau
    if counters is not None:
        counters.i_f += span
    return t_hold, p_hold, s_hold


def adjoint_flow_const(A, t: float, T: float, p) -> np.ndarray:
    """Exact adjoint flow ``p(t; T, p) = p expm((T - t) A)`` for constant A."""
    A = np.asarray(A, dtype=float)
    p = as_vector(p, A.shape[0])
    if t == T:
        return p.copy()
    from scipy.linalg import expm
    return p @ expm((T - t) * A)


def rho_lower_time_derivative(plant: LinearPlant, target: MovingBody,
                              t: float, p, reach_contact=None) -> float:
    """Time derivative of the lower distance bound at fixed p.

    ``(p/|p|) . (v_G(t)(-p) - A(t) s_R(t)(p) - u_E(p))``; its magnitude is
    bounded by the combined speed bound.  ``reach_contact`` may supply a
    precomputed contact point; otherwise the plant must provide the analytic
    contact engine.
    """
    p = as_vector(p, plant.dim)
    n = float(np.linalg.norm(p))
    if n == 0.0:
        raise ValueError("degenerate support vector")
    if not hasattr(target, "velocity_at"):
        raise ValueError("target provides no boundary velocity")
    if reach_contact is None:
        if plant.analytic_contact is None:
            raise ValueError("need a contact point or an analytic contact engine")
        reach_contact = plant.analytic_contact(t, p)
    v = target.velocity_at(t, -p)
    rate = v - plant.a_matrix(t) @ reach_contact - plant.u_extremal(p)
    return float(p @ rate) / n


# ---------------------------------------------------------------------------
# Contact engines
# ---------------------------------------------------------------------------

class ReachEngine:
    """Counted, memoized access to the reachable-set contact function.

    One engine serves one solver run.  Every unique (t, p) evaluation
    increments the unique-call counter and books the span t that a numeric
    approximation would integrate, so all three complexity metrics stay
    meaningful regardless of the engine kind.  Repeated evaluations at the
    same arguments hit the memo and cost nothing.
    """

    def __init__(self, plant: LinearPlant, integrator: IntegratorConfig,
                 counters: RunCounters, mode: str = "analytic"):
        if mode not in ("analytic", "rk4"):
            raise ValueError(f"unknown contact engine {mode!r}")
        if mode == "analytic" and plant.analytic_contact is None:
            raise ValueError("plant provides no analytic contact function")
        self.plant = plant
        self.integrator = integrator
        self.counters = counters
        self.mode = mode
        self._memo: dict[tuple[float, bytes], np.ndarray] = {}

    def contact(self, t: float, p: np.ndarray) -> np.ndarray:
        key = (t, p.tobytes())
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        if self.mode == "analytic":
            value = self.plant.analytic_contact(t, p)
            self.counters.n_s += 1
            self.counters.i_s += t
        else:
            value = rk4_contact(self.plant, self.integrator, t, p,
                                self.counters)
            self.counters.n_s += 1
        self._memo[key] = value
        return value


@dataclass(eq=False)
class FrozenReach:
    """Reachable set at a fixed time, as a convex body."""

    engine: ReachEngine
    t: float

    @property
    def dim(self) -> int:
        return self.engine.plant.dim

    def contact(self, p: np.ndarray) -> np.ndarray:
        return self.engine.contact(self.t, p)


class FrozenTarget:
    """Moving target frozen at a fixed time, as a convex body.

    Point targets are specialized: their frozen position is computed once
    (it does not depend on the support vector).
    """

    __slots__ = ("moving", "t", "_point")

    def __init__(self, moving: MovingBody, t: float):
        self.moving = moving
        self.t = t
        frozen = getattr(moving, "frozen", None)
        self._point = frozen(t).point if frozen is not None else None

    @property
    def dim(self) -> int:
        return self.moving.dim

    def contact(self, p: np.ndarray) -> np.ndarray:
        if self._point is not None:
            return self._point
        return self.moving.contact_at(self.t, p)


def frozen_pair(engine: ReachEngine, target: MovingBody, t: float) -> BodyPair:
    """Body pair (reachable set, target set) at time t."""
    return BodyPair(FrozenReach(engine, t), FrozenTarget(target, t))
