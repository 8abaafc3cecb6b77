"""Distance estimates between two convex bodies frozen at one time instant.

For a support vector p, the tangent-hyperplane gap
``rho_lower = (p/|p|) . (s_G(-p) - s_R(p))`` bounds the set distance from
below and the contact-point chord length ``rho_upper = |s_G(-p) - s_R(p)|``
bounds it from above; ``delta = rho_upper - rho_lower`` is the error
functional whose zero certifies the nearest-point pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .failures import Failure, FailureKind
from .geometry import ConvexBody, as_vector, unit_support

__all__ = [
    "EstimatePair", "BodyPair", "rho_lower", "rho_upper", "estimate",
    "ascent_direction", "xi_prime", "step_exponent", "simple_boost",
    "brute_force_distance", "sphere_directions",
]


@dataclass(frozen=True)
class EstimatePair:
    """(lower, upper, delta) sandwich around the true set distance."""

    lower: float
    upper: float
    delta: float

    @staticmethod
    def from_chord(p: np.ndarray, chord: np.ndarray) -> "EstimatePair":
        upper = math.sqrt(float(chord @ chord))
        lower = float(p @ chord) / math.sqrt(float(p @ p))
        return EstimatePair(lower, upper, upper - lower)


@dataclass(frozen=True, eq=False)
class BodyPair:
    """A reachable-set / target-set pair frozen at a single time instant."""

    reach: ConvexBody
    target: ConvexBody

    def chord(self, p: np.ndarray) -> np.ndarray:
        """``s_target(-p) - s_reach(p)``, the contact-point difference."""
        return self.target.contact(-p) - self.reach.contact(p)


def rho_lower(pair: BodyPair, p) -> float:
    """Signed gap between the two tangent hyperplanes at +-p (lower bound)."""
    p = as_vector(p)
    n = float(np.linalg.norm(p))
    if n == 0.0:
        raise ValueError("degenerate support vector")
    return float(p @ pair.chord(p)) / n


def rho_upper(pair: BodyPair, p) -> float:
    """Distance between the two contact points (upper bound)."""
    p = as_vector(p)
    if float(np.linalg.norm(p)) == 0.0:
        raise ValueError("degenerate support vector")
    return float(np.linalg.norm(pair.chord(p)))


def estimate(pair: BodyPair, p) -> EstimatePair:
    """Both bounds from a single contact evaluation."""
    p = as_vector(p)
    if float(np.linalg.norm(p)) == 0.0:
        raise ValueError("degenerate support vector")
    return EstimatePair.from_chord(p, pair.chord(p))


def ascent_direction(pair: BodyPair, p) -> np.ndarray:
    """Direction q along which the lower bound increases (when delta > 0).

    ``q = chord/|chord| - p``; at the optimal unit support vector q vanishes.
    """
    p = as_vector(p)
    chord = pair.chord(p)
    norm = float(np.linalg.norm(chord))
    if norm == 0.0:
        raise ValueError("contact points coincide")
    return chord / norm - p


def xi_prime(pair: BodyPair, p, gamma: float, q: np.ndarray | None = None) -> float:
    """Derivative in gamma of ``|p + gamma q| * rho_lower(p + gamma q)``.

    Evaluates ``q . chord(p + gamma q)`` at the raw (un-normalized) inclined
    vector.  ``q`` defaults to the ascent direction at ``p`` and may be
    passed in to reuse a previous computation.
    """
    p = as_vector(p)
    if q is None:
        q = ascent_direction(pair, p)
    inclined = p + gamma * q
    if float(np.linalg.norm(inclined)) == 0.0:
        raise ValueError("degenerate inclined vector")
    return float(q @ pair.chord(inclined))


def step_exponent(pair: BodyPair, p, gamma: float,
                  max_halvings: int = 200) -> int:
    """Minimal N >= 1 with ``xi_prime(gamma / 2**(N-1)) >= 0``.

    Requires a unit ``p`` with positive gap ``delta`` and nonnegative lower
    bound, and ``gamma`` in (0, 1]; the search is finite under those
    conditions, so exhausting ``max_halvings`` is reported as a step
    underflow.
    """
    p = unit_support(p)
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    est = estimate(pair, p)
    if est.delta <= 0.0:
        raise ValueError("gap already closed (delta <= 0)")
    if est.lower < 0.0:
        raise ValueError("lower bound must be nonnegative")
    q = ascent_direction(pair, p)
    step = gamma
    for n in range(1, max_halvings + 1):
        if xi_prime(pair, p, step, q) >= 0.0:
            return n
        step *= 0.5
    raise Failure(FailureKind.STEP_UNDERFLOW,
                  f"no nonnegative slope within {max_halvings} halvings")


def simple_boost(t: float, lower: float, v_reach: float, v_target: float) -> float:
    """Conservative time boost ``t + lower / (v_reach + v_target)``.

    The bodies approach each other at most at the combined speed bound, so
    separation persists on the boosted interval.  Negative ``lower`` leaves
    ``t`` unchanged.
    """
    total = v_reach + v_target
    if total <= 0.0:
        raise ValueError("static problem, f undefined")
    if lower < 0.0:
        return t
    return t + lower / total


def sphere_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic low-discrepancy unit directions, shape (count, dim)."""
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    if dim == 1:
        return np.array([[1.0], [-1.0]])[np.arange(count) % 2]
    if dim == 2:
        angles = 2.0 * np.pi * (np.arange(count) + 0.5) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    from scipy.stats import qmc
    from scipy.special import ndtri
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed)
    u = sob.random(count)
    g = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(g, axis=1)
    norms[norms == 0.0] = 1.0
    return g / norms[:, None]


def brute_force_distance(pair: BodyPair, samples: int,
                         seed: int = 0) -> tuple[float, float]:
    """Oracle bracket of the set distance by sweeping unit support vectors.

    Returns ``(max_p rho_lower, min_p rho_upper)``; the true distance lies
    between them whenever the bodies intersect in at most one point.
    """
    if samples < 8:
        raise ValueError("need at least 8 direction samples")
    dirs = sphere_directions(_pair_dim(pair), samples, seed)
    lo = -math.inf
    hi = math.inf
    for p in dirs:
        chord = pair.chord(p)
        lo = max(lo, float(p @ chord))
        hi = min(hi, float(np.linalg.norm(chord)))
    return lo, hi


def _pair_dim(pair: BodyPair) -> int:
    for body in (pair.reach, pair.target):
        for attr in ("dim",):
            if hasattr(body, attr):
                return int(getattr(body, attr))
    raise ValueError("cannot infer dimension from bodies")
