"""Per-run instrumentation counters and the three empirical complexity metrics.

A problem instance falls into one of three cost regimes depending on whether
the reachable-set contact function and the boosting-time function are
available analytically:

* type A -- both numeric: cost is integration span (one backward + two
  forward passes per contact approximation, two forward per boost),
* type B -- analytic contact, numeric boost: cost is weighted by the average
  CPU time of one analytic contact call and of one integration step,
* type C -- both analytic: cost is the number of unique calls.
"""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["RunCounters", "ComplexityWeights",
           "complexity_type_a", "complexity_type_b", "complexity_type_c"]


@dataclass
class RunCounters:
    """Accumulators owned by a single solver run.

    i_s / i_f are the total time spans integrated (or that would be
    integrated) by the contact approximation and by the boost search; n_s /
    n_f count unique contact-function and boost-function evaluations.
    """

    i_s: float = 0.0
    i_f: float = 0.0
    n_s: int = 0
    n_f: int = 0

    def add(self, other: "RunCounters") -> None:
        self.i_s += other.i_s
        self.i_f += other.i_f
        self.n_s += other.n_s
        self.n_f += other.n_f

    def snapshot(self) -> tuple[float, float, int, int]:
        return (self.i_s, self.i_f, self.n_s, self.n_f)


@dataclass(frozen=True)
class ComplexityWeights:
    """Average CPU seconds of one analytic contact call (t_an) and of one
    fixed-step integration step (kappa)."""

    t_an: float = 422e-9
    kappa: float = 208e-10

    def __post_init__(self):
        if self.t_an <= 0 or self.kappa <= 0:
            raise ValueError("complexity weights must be positive")


def complexity_type_a(c: RunCounters) -> float:
    """Weighted integration span: ``3 i_s + 2 i_f``."""
    return 3.0 * c.i_s + 2.0 * c.i_f


def complexity_type_b(c: RunCounters, w: ComplexityWeights, tau: float) -> float:
    """Seconds attributable to contact calls plus boost integration steps."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    return w.t_an * c.n_s + w.kappa * (c.i_f / tau)


def complexity_type_c(c: RunCounters) -> int:
    """Unique expensive calls: ``n_s + n_f``."""
    return c.n_s + c.n_f
