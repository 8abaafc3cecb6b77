"""Runtime failure taxonomy for the distance and minimum-time solvers.

Imprecise arithmetic (numerical integration, float64 rounding) can push an
otherwise convergent solver into an infinite loop or an inconsistent state.
Every such state is detected by one of seven monitored conditions and is
reported as a :class:`Failure` carrying the condition code.
"""

from __future__ import annotations

from enum import IntEnum
from typing import Iterable, Mapping, Optional


class FailureKind(IntEnum):
    """Monitored breakdown conditions, by code.

    1. gap error ``delta`` went negative (Schwarz violation),
    2. separation lower bound went negative where positivity is guaranteed,
    3. the time variable decreased,
    4. the boosting function was called more than the allowed cap,
    5. the simplex distance ``|s|`` stopped decreasing inside a distance loop,
    6. ``|s|`` collapsed to zero inside a distance loop,
    7. the line-search step underflowed to zero.
    """

    NEGATIVE_GAP = 1
    NEGATIVE_LOWER_BOUND = 2
    TIME_DECREASED = 3
    BOOST_CALL_CAP = 4
    SIMPLEX_STALLED = 5
    SIMPLEX_COLLAPSED = 6
    STEP_UNDERFLOW = 7


class Failure(RuntimeError):
    """Raised when a monitored failure condition triggers."""

    def __init__(self, kind: FailureKind, detail: str = ""):
        self.kind = FailureKind(kind)
        self.detail = detail
        msg = f"failure condition {int(self.kind)} ({self.kind.name.lower()})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class CapExceeded(RuntimeError):
    """Raised when a safety iteration cap (not one of the seven monitored
    conditions) is exhausted."""


#: Smallest step size treated as nonzero; below this the halving loops have
#: effectively reached gamma <= 0 in float64.
GAMMA_UNDERFLOW = 1e-300

BOOST_CALL_CAP_DEFAULT = 10_000


class FailureMonitor:
    """Per-run telemetry sink that raises :class:`Failure` on the first
    triggered condition.

    Only *armed* conditions are checked; which conditions are armed depends
    on the solver / distance-algorithm combination (codes 1-4 always, 5-6
    for simplex-based distance loops, 7 for step-halving loops).
    """

    def __init__(self, armed: Iterable[FailureKind] = tuple(FailureKind),
                 boost_cap: int = BOOST_CALL_CAP_DEFAULT):
        self.armed = frozenset(FailureKind(k) for k in armed)
        self.boost_cap = int(boost_cap)
        self.boost_calls = 0
        self._prev_t: Optional[float] = None
        self._prev_norm: Optional[float] = None

    # -- condition feeds ---------------------------------------------------

    def check_gap(self, delta: float) -> None:
        if FailureKind.NEGATIVE_GAP in self.armed and delta < 0.0:
            raise Failure(FailureKind.NEGATIVE_GAP, f"delta={delta!r}")

    def check_lower_bound(self, lower: float) -> None:
        """Check a lower bound at a point where theory guarantees it >= 0."""
        if FailureKind.NEGATIVE_LOWER_BOUND in self.armed and lower < 0.0:
            raise Failure(FailureKind.NEGATIVE_LOWER_BOUND, f"rho_lower={lower!r}")

    def note_time(self, t: float) -> None:
        if (FailureKind.TIME_DECREASED in self.armed
                and self._prev_t is not None and t < self._prev_t):
            raise Failure(FailureKind.TIME_DECREASED,
                          f"t={t!r} after t={self._prev_t!r}")
        self._prev_t = t

    def note_boost_call(self) -> None:
        self.boost_calls += 1
        if (FailureKind.BOOST_CALL_CAP in self.armed
                and self.boost_calls > self.boost_cap):
            raise Failure(FailureKind.BOOST_CALL_CAP,
                          f"more than {self.boost_cap} boost calls")

    def reset_norm_trace(self) -> None:
        """Start a fresh ``|s|`` decrease trace (one per distance-loop run)."""
        self._prev_norm = None

    def note_simplex_norm(self, norm: float) -> None:
        if FailureKind.SIMPLEX_COLLAPSED in self.armed and norm <= 1e-14:
            raise Failure(FailureKind.SIMPLEX_COLLAPSED, f"|s|={norm!r}")
        if (FailureKind.SIMPLEX_STALLED in self.armed
                and self._prev_norm is not None and norm >= self._prev_norm):
            raise Failure(FailureKind.SIMPLEX_STALLED,
                          f"|s|={norm!r} after |s|={self._prev_norm!r}")
        self._prev_norm = norm

    def note_gamma(self, gamma: float) -> None:
        if (FailureKind.STEP_UNDERFLOW in self.armed
                and gamma < GAMMA_UNDERFLOW):
            raise Failure(FailureKind.STEP_UNDERFLOW, f"gamma={gamma!r}")


def scan_events(events: Iterable[Mapping[str, float]],
                boost_cap: int = BOOST_CALL_CAP_DEFAULT) -> Optional[FailureKind]:
    """Feed recorded telemetry events through a fully armed monitor.

    Each event is a mapping with any of the keys ``delta``,
    ``rho_lower_certified``, ``t``, ``boost_call`` (truthy => one call),
    ``s_norm``, ``gamma``.  Returns the first triggered condition code, or
    ``None`` when the whole trace is clean.
    """
    monitor = FailureMonitor(boost_cap=boost_cap)
    try:
        for event in events:
            if "delta" in event:
                monitor.check_gap(float(event["delta"]))
            if "rho_lower_certified" in event:
                monitor.check_lower_bound(float(event["rho_lower_certified"]))
            if "t" in event:
                monitor.note_time(float(event["t"]))
            if event.get("boost_call"):
                monitor.note_boost_call()
            if "s_norm" in event:
                monitor.note_simplex_norm(float(event["s_norm"]))
            if "gamma" in event:
                monitor.note_gamma(float(event["gamma"]))
    except Failure as exc:
        return exc.kind
    return None
