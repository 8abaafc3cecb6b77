"""Minimum-time solvers for linear systems.

All three algorithms share the same outer shape: certify initial separation
with the polytope distance algorithm at t = 0, then alternate a time boost
with a support-vector update until the chord length (upper distance bound)
drops below epsilon:

* ``neustadt_eaton``  -- boosts along the adjoint flow to the tangent-plane
  collision time and inclines the support vector by one halving line-search
  step (no convergence guarantee; monitored),
* ``barr_gilbert``    -- boosts the same way but delegates the support
  update to a full distance solve,
* ``semi_analytic``   -- replaces the integrated boost with the
  speed-bound-based conservative boost, so a plant with an analytic contact
  function never integrates anything; terminates finitely whenever the
  target is reachable (with the certificate-based distance solvers).

Every run carries a failure monitor implementing the seven breakdown
conditions; a monitored failure, an exhausted cap, or a diverged boost is
reported in the outcome rather than raised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .counters import RunCounters
from .distance import (MdpConfig, gilbert_distance, gjk_distance, gjk_star,
                       gradient_ascent, steepest_ascent)
from .dynamics import (BoostDiverged, IntegratorConfig, LinearPlant,
                       ReachEngine, frozen_pair, rk4_boost)
from .estimates import BodyPair, EstimatePair, simple_boost
from .failures import (CapExceeded, Failure, FailureKind, FailureMonitor,
                       GAMMA_UNDERFLOW)
from .geometry import MovingBody, unit_support

__all__ = [
    "DA_SOLVERS", "MtplsConfig", "MtplsOutcome", "Status",
    "neustadt_eaton", "barr_gilbert", "semi_analytic",
    "reference_t_star", "first_crossing_time",
]

DA_SOLVERS: dict[str, Callable] = {
    "gjk": gjk_star,
    "g": gilbert_distance,
    "sa": steepest_ascent,
    "ga": gradient_ascent,
}


class Status(Enum):
    CONVERGED = "converged"
    TRIVIAL_HIT_AT_ZERO = "trivial_hit_at_zero"
    FAILED = "failed"


@dataclass(frozen=True)
class MtplsConfig:
    """Solver configuration.

    epsilon terminates the outer loop (on the upper distance bound); alpha
    is the relative tolerance of the inner distance solves; da_kind selects
    the distance algorithm for the decomposition-based solvers.  The
    integrator config drives the boost search (and the contact engine when
    ``engine='rk4'``).  The horizon bounds t for unreachable targets; when
    unset it defaults to ``10 * rho_upper(0) / (v_R - v_G)`` where that is
    meaningful.
    """

    epsilon: float
    alpha: float = 1e-2
    da_kind: Optional[str] = None
    integrator: IntegratorConfig = field(default_factory=lambda: IntegratorConfig(tau=1e-3))
    engine: str = "analytic"
    boost_call_cap: int = 10_000
    horizon: Optional[float] = None
    max_outer: int = 100_000
    mdp_max_iters: int = 100_000
    record_trace: bool = True
    boltyanskii_step: bool = False

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if self.da_kind is not None and self.da_kind not in DA_SOLVERS:
            raise ValueError(f"unknown distance algorithm {self.da_kind!r}")

    def mdp_config(self) -> MdpConfig:
        return MdpConfig(epsilon=self.epsilon, alpha=self.alpha,
                         max_iters=self.mdp_max_iters)


@dataclass
class MtplsOutcome:
    """Result of one minimum-time solve."""

    t_star: float
    p_star: np.ndarray
    status: Status
    failure: Optional[FailureKind]
    detail: str
    counters: RunCounters
    iterations: int
    trace: list[tuple[float, float, float]]

    @property
    def ok(self) -> bool:
        return self.status is not Status.FAILED

    @property
    def fail_code(self) -> int:
        """0 for success or non-condition failures, 1..7 otherwise."""
        return int(self.failure) if self.failure is not None else 0


def _armed_conditions(algo: str, da_kind: Optional[str]) -> frozenset[FailureKind]:
    armed = {FailureKind.NEGATIVE_GAP, FailureKind.NEGATIVE_LOWER_BOUND,
             FailureKind.TIME_DECREASED, FailureKind.BOOST_CALL_CAP}
    if da_kind in ("gjk", "g"):
        armed |= {FailureKind.SIMPLEX_STALLED, FailureKind.SIMPLEX_COLLAPSED}
    if algo == "ne" or da_kind in ("sa", "ga"):
        armed.add(FailureKind.STEP_UNDERFLOW)
    return frozenset(armed)


class _Run:
    """Shared per-run state of the three solvers."""

    def __init__(self, plant: LinearPlant, target: MovingBody,
                 cfg: MtplsConfig, algo: str):
        self.plant = plant
        self.target = target
        self.cfg = cfg
        self.counters = RunCounters()
        self.engine = ReachEngine(plant, cfg.integrator, self.counters,
                                  cfg.engine)
        self.monitor = FailureMonitor(_armed_conditions(algo, cfg.da_kind),
                                      cfg.boost_call_cap)
        self.trace: list[tuple[float, float, float]] = []
        self.iterations = 0
        self.horizon = cfg.horizon  # resolved after the first estimate
        self._pair_cache: dict[float, BodyPair] = {}

    def pair(self, t: float) -> BodyPair:
        pair = self._pair_cache.get(t)
        if pair is None:
            pair = frozen_pair(self.engine, self.target, t)
            self._pair_cache.clear()  # one frozen instant at a time
            self._pair_cache[t] = pair
        return pair

    def estimate(self, t: float, p: np.ndarray) -> EstimatePair:
        pair = self.pair(t)
        return EstimatePair.from_chord(p, pair.chord(p))

    def resolve_horizon(self, initial_upper: float) -> None:
        if self.horizon is not None:
            return
        v_r = self.plant.speed_bound
        v_g = self.target.speed_bound
        if v_r > v_g:
            self.horizon = 10.0 * initial_upper / (v_r - v_g)
        else:
            self.horizon = math.inf

    def boost(self, t: float, p: np.ndarray):
        """One boosting-time evaluation (integrated search)."""
        self.monitor.note_boost_call()
        s = self.engine.contact(t, p)
        cap = self.horizon if self.horizon is not None else math.inf
        fast = getattr(self.plant, "fast_boost", None)
        if fast is not None:
            t_new, p_new, s_new, span, diverged = fast(
                t, p, s, self.cfg.integrator.tau, cap)
            self.counters.n_f += 1
            self.counters.i_f += span
            if diverged:
                raise BoostDiverged(
                    f"boosting diverged: no sign change up to t={t_new!r}")
        else:
            t_new, p_new, s_new = rk4_boost(
                self.plant, self.target, self.cfg.integrator, t, p, s,
                self.counters, t_max=cap)
        self.monitor.note_time(t_new)
        return t_new, p_new

    def simple_boost(self, t: float, lower: float) -> float:
        self.monitor.note_boost_call()
        t_new = simple_boost(t, lower, self.plant.speed_bound,
                             self.target.speed_bound)
        self.monitor.note_time(t_new)
        return t_new

    def outcome(self, t: float, p: np.ndarray, status: Status,
                failure: Optional[FailureKind] = None,
                detail: str = "") -> MtplsOutcome:
        return MtplsOutcome(
            t_star=t, p_star=np.asarray(p, dtype=float), status=status,
            failure=failure, detail=detail, counters=self.counters,
            iterations=self.iterations,
            trace=self.trace if self.cfg.record_trace else [])


def _solve(plant: LinearPlant, target: MovingBody, cfg: MtplsConfig, p0,
           algo: str) -> MtplsOutcome:
    if algo != "ne" and cfg.da_kind is None:
        raise ValueError(f"{algo!r} requires a distance algorithm (da_kind)")
    run = _Run(plant, target, cfg, algo)
    p = unit_support(p0)
    t = 0.0
    gamma = 1.0
    try:
        s = gjk_distance(run.pair(0.0), cfg.mdp_config(), p, run.monitor)
        s_norm = float(np.linalg.norm(s))
        if s_norm <= cfg.epsilon:
            return run.outcome(0.0, p, Status.TRIVIAL_HIT_AT_ZERO)
        p = -s / s_norm
        # separation is guaranteed here whenever |s| > eps
        run.monitor.check_lower_bound(run.estimate(0.0, p).lower)

        prev_state: Optional[tuple[float, bytes, float]] = None
        da = DA_SOLVERS[cfg.da_kind] if cfg.da_kind is not None else None
        while run.iterations < cfg.max_outer:
            run.iterations += 1
            pair = run.pair(t)
            chord = pair.chord(p)
            est = EstimatePair.from_chord(p, chord)
            if cfg.record_trace:
                run.trace.append((t, est.lower, est.upper))
            if est.upper <= cfg.epsilon:
                return run.outcome(t, p, Status.CONVERGED)
            run.resolve_horizon(est.upper)
            if t > run.horizon:
                return run.outcome(t, p, Status.FAILED, None,
                                   "t exceeded the reachability horizon")
            # a bitwise-identical iteration state can only repeat forever;
            # the boost-call cap is the condition that would eventually end
            # it, so report it now
            state = (t, p.tobytes(), gamma)
            if state == prev_state:
                raise Failure(FailureKind.BOOST_CALL_CAP,
                              "stationary iteration (early cap)")
            prev_state = state

            if algo == "s":
                t = run.simple_boost(t, est.lower)
            else:
                t, p = run.boost(t, p)
            post = run.estimate(t, p)
            run.monitor.check_lower_bound(post.lower)

            if algo == "ne":
                p, gamma = _eaton_incline(run, t, p, post, gamma)
            else:
                out = da(run.pair(t), cfg.mdp_config(), p, run.monitor, gamma)
                p, gamma = out.support, out.gamma_final
                run.monitor.check_lower_bound(out.estimates.lower)
        return run.outcome(t, p, Status.FAILED, None, "outer iteration cap")
    except Failure as exc:
        return run.outcome(t, p, Status.FAILED, exc.kind, exc.detail)
    except BoostDiverged as exc:
        # a diverged boost search shows up as the boost-call budget
        return run.outcome(t, p, Status.FAILED, FailureKind.BOOST_CALL_CAP,
                           str(exc))
    except CapExceeded as exc:
        return run.outcome(t, p, Status.FAILED, None, str(exc))


def _eaton_incline(run: _Run, t: float, p: np.ndarray, est: EstimatePair,
                   gamma: float) -> tuple[np.ndarray, float]:
    """One halving line-search step along the inclination direction.

    Halves gamma until the lower bound strictly improves (or, with the
    alternative provably convergent rule enabled, until the stricter
    inequality holds); gamma persists to the next outer iteration.
    """
    if est.upper == 0.0 or est.delta <= 0.0:
        # contact points coincide, or the support vector is already exactly
        # optimal at t (zero gap => zero inclination direction; the update
        # would be the identity)
        return p / float(np.linalg.norm(p)), gamma
    pair = run.pair(t)
    q = pair.chord(p) / est.upper - p
    base = est.lower
    while True:
        probe = EstimatePair.from_chord(p + gamma * q,
                                        pair.chord(p + gamma * q)).lower
        if run.cfg.boltyanskii_step:
            if probe > gamma * est.upper ** 2:
                break
        else:
            if probe > base:
                break
        gamma *= 0.5
        if gamma < GAMMA_UNDERFLOW:
            raise Failure(FailureKind.STEP_UNDERFLOW, f"gamma={gamma!r}")
    inclined = p + gamma * q
    return inclined / float(np.linalg.norm(inclined)), gamma


def neustadt_eaton(plant: LinearPlant, target: MovingBody, cfg: MtplsConfig,
                   p0) -> MtplsOutcome:
    """Boosting-time maximization with the halving inclination rule."""
    return _solve(plant, target, cfg, p0, "ne")


def barr_gilbert(plant: LinearPlant, target: MovingBody, cfg: MtplsConfig,
                 p0) -> MtplsOutcome:
    """Decomposition into boosts and full distance solves."""
    return _solve(plant, target, cfg, p0, "bg")


def semi_analytic(plant: LinearPlant, target: MovingBody, cfg: MtplsConfig,
                  p0) -> MtplsOutcome:
    """Integration-free solver: conservative boosts plus distance solves.

    The time sequence increases strictly below the minimum time and never
    overshoots it, so the reported time is always a lower approximation.
    """
    return _solve(plant, target, cfg, p0, "s")


# ---------------------------------------------------------------------------
# Independent oracle
# ---------------------------------------------------------------------------

def _distance_probe(plant: LinearPlant, target: MovingBody,
                    cfg: MtplsConfig, gjk_eps: float):
    counters = RunCounters()
    engine = ReachEngine(plant, cfg.integrator, counters, cfg.engine)
    mdp = MdpConfig(epsilon=gjk_eps, alpha=1e-6, max_iters=200_000)

    def rho_hat(t: float, p: np.ndarray) -> float:
        pair = frozen_pair(engine, target, t)
        return float(np.linalg.norm(gjk_distance(pair, mdp, p)))

    return rho_hat


def first_crossing_time(plant: LinearPlant, target: MovingBody, level: float,
                        tol: float = 1e-6, p0=None,
                        cfg: MtplsConfig | None = None,
                        gjk_eps: float = 1e-10,
                        horizon: Optional[float] = None) -> float:
    """First time at which the set distance drops to ``level``, by marching
    plus bisection on a certified distance evaluation.

    The march step ``(rho(t) - level) / (v_R + v_G)`` cannot skip the first
    crossing because the distance changes at most at the combined speed
    bound.  The final bracket is narrowed below ``tol``.
    """
    if cfg is None:
        cfg = MtplsConfig(epsilon=max(level, 1e-9), integrator=IntegratorConfig(tau=1e-3))
    rho_hat = _distance_probe(plant, target, cfg, gjk_eps)
    p = unit_support(p0) if p0 is not None else _default_probe_direction(plant, target)
    combined = plant.speed_bound + target.speed_bound
    if combined <= 0.0:
        raise ValueError("static problem, crossing search undefined")
    slack = max(gjk_eps * 4.0, 1e-15)

    t = 0.0
    rho = rho_hat(0.0, p)
    if rho <= level + slack:
        return 0.0
    if horizon is None:
        horizon = (10.0 * rho / (plant.speed_bound - target.speed_bound)
                   if plant.speed_bound > target.speed_bound else 1e6)
    # march conservatively to a bracketing interval
    while True:
        step = max((rho - level) / combined, 0.25 * tol)
        t_next = t + step
        if t_next > horizon:
            raise ValueError("target unreachable on horizon")
        rho_next = rho_hat(t_next, p)
        if rho_next <= level + slack:
            lo, hi = t, t_next
            break
        t, rho = t_next, rho_next
    # bisect the bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if rho_hat(mid, p) <= level + slack:
            hi = mid
        else:
            lo = mid
    return hi


def reference_t_star(plant: LinearPlant, target: MovingBody,
                     tol: float = 1e-6, p0=None,
                     horizon: Optional[float] = None) -> float:
    """Minimum time as the first zero of the set distance (oracle)."""
    return first_crossing_time(plant, target, level=0.0, tol=tol, p0=p0,
                               horizon=horizon)


def _default_probe_direction(plant: LinearPlant, target: MovingBody) -> np.ndarray:
    d = target.contact_at(0.0, np.ones(plant.dim)) - plant.s0
    n = float(np.linalg.norm(d))
    if n == 0.0:
        d = np.zeros(plant.dim)
        d[0] = 1.0
        return d
    return d / n
