"""Minimal-distance solvers over a frozen body pair.

Four algorithms compute the distance between two disjoint strictly convex
compact sets given by contact functions:

* ``gjk_distance``  -- classic polytope-refinement distance (returns the
  distance vector in the difference set),
* ``gjk_star``      -- same machinery, but returns the certified unit
  support vector with ``delta <= alpha * rho_lower``,
* ``gilbert_distance`` -- line-segment predecessor of the polytope method,
* ``steepest_ascent``  -- maximizes the lower bound along the inclination
  direction with a halving step rule whose convergence is certificate-based,
* ``gradient_ascent``  -- same but along the raw gradient of the lower
  bound; no finite-termination guarantee, so the iteration cap is load
  bearing.

All of them raise :class:`mintime.failures.Failure` when one of the
monitored breakdown conditions triggers, and :class:`CapExceeded` when the
safety iteration cap runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .estimates import BodyPair, EstimatePair
from .failures import (GAMMA_UNDERFLOW, CapExceeded, Failure, FailureKind,
                       FailureMonitor)
from .geometry import unit_support
from .johnson import merge_vertex, nearest_in_hull

__all__ = ["MdpConfig", "MdpOutcome", "gjk_distance", "gjk_star",
           "gilbert_distance", "steepest_ascent", "gradient_ascent"]


@dataclass(frozen=True)
class MdpConfig:
    """Tolerances shared by the distance solvers.

    epsilon is the absolute tolerance of ``gjk_distance``; alpha the
    relative certificate tolerance of the other four; gamma0 the initial
    line-search step; max_iters a safety cap (the convergence proofs assume
    exact arithmetic).
    """

    epsilon: float = 1e-8
    alpha: float = 1e-6
    gamma0: float = 0.5
    max_iters: int = 100_000

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.alpha <= 0.0:
            raise ValueError("alpha must be positive")
        if not 0.0 < self.gamma0 < 1.0:
            raise ValueError("gamma0 must lie in (0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")


@dataclass
class MdpOutcome:
    """Certified result of a distance solve."""

    support: np.ndarray
    estimates: EstimatePair
    iterations: int
    contact_calls: int
    gamma_final: float


def _check_gap(est: EstimatePair, monitor: FailureMonitor | None) -> None:
    if monitor is not None:
        monitor.check_gap(est.delta)
    elif est.delta < 0.0:
        raise Failure(FailureKind.NEGATIVE_GAP, f"delta={est.delta!r}")


def _note_norm(norm: float, prev: float | None,
               monitor: FailureMonitor | None) -> None:
    """Conditions 5 and 6 on the simplex distance trace."""
    if monitor is not None:
        monitor.note_simplex_norm(norm)
        return
    if norm <= 1e-14:
        raise Failure(FailureKind.SIMPLEX_COLLAPSED, f"|s|={norm!r}")
    if prev is not None and norm >= prev:
        raise Failure(FailureKind.SIMPLEX_STALLED,
                      f"|s|={norm!r} after |s|={prev!r}")


def gjk_distance(pair: BodyPair, cfg: MdpConfig, p0,
                 monitor: FailureMonitor | None = None) -> np.ndarray:
    """Distance vector between the bodies, accurate to ``cfg.epsilon``.

    Works in the difference set: iteratively refines a vertex polytope with
    contact points until ``|s| <= eps`` (overlap) or
    ``|s| - rho_lower(-s) <= eps`` (certified near-optimal separation).
    Returns the final ``s``; ``|s|`` overestimates the distance by at most
    ``eps``.
    """
    p = unit_support(p0)
    s = pair.reach.contact(p) - pair.target.contact(-p)
    vertices = [s]
    if monitor is not None:
        monitor.reset_norm_trace()
    prev_norm = None
    for _ in range(cfg.max_iters):
        norm = float(np.linalg.norm(s))
        if norm <= cfg.epsilon:
            return s
        # rho_lower(t, -s^T) = (s/|s|) . w with w the contact point of the
        # difference set in direction -s
        w = pair.reach.contact(-s) - pair.target.contact(s)
        if norm - float(s @ w) / norm <= cfg.epsilon:
            return s
        _note_norm(norm, prev_norm, monitor)
        prev_norm = norm
        vertices = merge_vertex(vertices, w)
        if len(vertices) > s.size + 1:
            raise Failure(FailureKind.SIMPLEX_STALLED,
                          "vertex set exceeded n+1 without enclosing origin")
        s, vertices = nearest_in_hull(vertices)
    raise CapExceeded(f"gjk_distance: no termination in {cfg.max_iters} iterations")


def gjk_star(pair: BodyPair, cfg: MdpConfig, p0,
             monitor: FailureMonitor | None = None,
             gamma: float | None = None) -> MdpOutcome:
    """Certified support vector via the polytope distance iteration.

    Requires disjoint bodies.  Terminates with
    ``delta(p) <= alpha * rho_lower(p)``; hence
    ``(1 + alpha) rho_lower >= rho_upper`` and the returned support vector
    strictly separates the bodies.  ``gamma`` is accepted for interface
    parity with the ascent solvers and passed through unchanged.
    """
    p = unit_support(p0)
    calls = 1
    chord = pair.chord(p)
    vertices = [-chord]  # s_R(p) - s_G(-p)
    if monitor is not None:
        monitor.reset_norm_trace()
    prev_norm = None
    for it in range(cfg.max_iters):
        est = EstimatePair.from_chord(p, chord)
        if est.delta <= cfg.alpha * est.lower:
            return MdpOutcome(p, est, it, calls,
                              cfg.gamma0 if gamma is None else gamma)
        _check_gap(est, monitor)
        s, vertices = nearest_in_hull(vertices)
        norm = float(np.linalg.norm(s))
        _note_norm(norm, prev_norm, monitor)
        prev_norm = norm
        p = -s / norm
        chord = pair.chord(p)
        calls += 1
        vertices = merge_vertex(vertices, -chord)
        if len(vertices) > s.size + 1:
            raise Failure(FailureKind.SIMPLEX_STALLED,
                          "vertex set exceeded n+1 without enclosing origin")
    raise CapExceeded(f"gjk_star: no termination in {cfg.max_iters} iterations")


def gilbert_distance(pair: BodyPair, cfg: MdpConfig, p0,
                     monitor: FailureMonitor | None = None,
                     gamma: float | None = None) -> MdpOutcome:
    """Certified support vector via the line-segment distance iteration.

    Same contract as :func:`gjk_star`; the inner update replaces the current
    difference-set point by the nearest point to the origin on the segment
    joining it to the freshly computed contact point.
    """
    p = unit_support(p0)
    calls = 1
    chord = pair.chord(p)
    s = -chord
    if monitor is not None:
        monitor.reset_norm_trace()
    prev_norm = None
    for it in range(cfg.max_iters):
        est = EstimatePair.from_chord(p, chord)
        if est.delta <= cfg.alpha * est.lower:
            return MdpOutcome(p, est, it, calls,
                              cfg.gamma0 if gamma is None else gamma)
        _check_gap(est, monitor)
        norm = float(np.linalg.norm(s))
        _note_norm(norm, prev_norm, monitor)
        prev_norm = norm
        p = -s / norm
        chord = pair.chord(p)
        calls += 1
        stilde = s + chord  # s - (s_R(p) - s_G(-p))
        denom = float(stilde @ stilde)
        if denom > 0.0:
            step = min(1.0, max(0.0, float(s @ stilde) / denom))
            s = s - step * stilde
    raise CapExceeded(
        f"gilbert_distance: no termination in {cfg.max_iters} iterations")


def steepest_ascent(pair: BodyPair, cfg: MdpConfig, p0,
                    monitor: FailureMonitor | None = None,
                    gamma: float | None = None,
                    trace: list | None = None) -> MdpOutcome:
    """Maximize the lower bound along the inclination direction.

    The step is halved until the slope of
    ``|p + gamma q| rho_lower(p + gamma q)`` is nonnegative, which provably
    yields a strict increase of the lower bound; gamma persists across outer
    iterations (it is never reset).  ``trace``, when given, accumulates the
    per-iteration estimates (convergence diagnostics).
    """
    p = unit_support(p0)
    g = cfg.gamma0 if gamma is None else gamma
    if not 0.0 < g <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    chord = pair.chord(p)
    calls = 1
    est = EstimatePair.from_chord(p, chord)
    if est.lower < 0.0:
        raise ValueError("ascent requires a separating start "
                         f"(rho_lower={est.lower!r} < 0)")
    for it in range(cfg.max_iters):
        if trace is not None:
            trace.append(est)
        if est.delta <= cfg.alpha * est.lower:
            return MdpOutcome(p, est, it, calls, g)
        _check_gap(est, monitor)
        if est.upper == 0.0:
            raise ValueError("contact points coincide")
        q = chord / est.upper - p
        while True:
            calls += 1
            if float(q @ pair.chord(p + g * q)) >= 0.0:
                break
            g *= 0.5
            if g < GAMMA_UNDERFLOW:
                raise Failure(FailureKind.STEP_UNDERFLOW, f"gamma={g!r}")
        inclined = p + g * q
        p = inclined / float(np.linalg.norm(inclined))
        chord = pair.chord(p)
        calls += 1
        est = EstimatePair.from_chord(p, chord)
    raise CapExceeded(
        f"steepest_ascent: no termination in {cfg.max_iters} iterations")


def gradient_ascent(pair: BodyPair, cfg: MdpConfig, p0,
                    monitor: FailureMonitor | None = None,
                    gamma: float | None = None,
                    trace: list | None = None) -> MdpOutcome:
    """Maximize the lower bound along its gradient.

    The step is halved until the lower bound strictly increases.  Unlike the
    other three solvers this one carries no finite-termination proof, so
    ``cfg.max_iters`` is load bearing rather than a formality.
    """
    p = unit_support(p0)
    g = cfg.gamma0 if gamma is None else gamma
    if not 0.0 < g <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    chord = pair.chord(p)
    calls = 1
    est = EstimatePair.from_chord(p, chord)
    if est.lower < 0.0:
        raise ValueError("ascent requires a separating start "
                         f"(rho_lower={est.lower!r} < 0)")
    for it in range(cfg.max_iters):
        if trace is not None:
            trace.append(est)
        if est.delta <= cfg.alpha * est.lower:
            return MdpOutcome(p, est, it, calls, g)
        _check_gap(est, monitor)
        # gradient of rho_lower at unit p: chord - p (p . chord)
        grad = chord - p * est.lower
        while True:
            calls += 1
            probe = p + g * grad
            if EstimatePair.from_chord(probe, pair.chord(probe)).lower > est.lower:
                break
            g *= 0.5
            if g < GAMMA_UNDERFLOW:
                raise Failure(FailureKind.STEP_UNDERFLOW, f"gamma={g!r}")
        stepped = p + g * grad
        p = stepped / float(np.linalg.norm(stepped))
        chord = pair.chord(p)
        calls += 1
        est = EstimatePair.from_chord(p, chord)
    raise CapExceeded(
        f"gradient_ascent: no termination in {cfg.max_iters} iterations")
