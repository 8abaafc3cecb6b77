import math

import numpy as np
import pytest

from mintime.counters import RunCounters
from mintime.dynamics import (IntegratorConfig, ReachEngine, ball_plant,
                              frozen_pair, rk4_contact)
from mintime.estimates import EstimatePair
from mintime.failures import FailureKind, scan_events
from mintime.geometry import MovingPointBody
from mintime.rocket import Scenario
from mintime.solvers import (MtplsConfig, Status, barr_gilbert,
                             first_crossing_time, neustadt_eaton,
                             reference_t_star, semi_analytic)

SOLVERS = {"ne": neustadt_eaton, "bg": barr_gilbert, "s": semi_analytic}
ALL_VARIANTS = [("ne", None), ("bg", "gjk"), ("bg", "g"), ("bg", "sa"),
                ("bg", "ga"), ("s", "gjk"), ("s", "g"), ("s", "sa"),
                ("s", "ga")]


def static_target(point):
    point = np.asarray(point, dtype=float)
    return MovingPointBody(point, np.zeros_like(point))


def solve(algo, da, plant, target, p0, eps=3.0 ** -7, tau=1e-3, **kw):
    cfg = MtplsConfig(epsilon=eps, alpha=kw.pop("alpha", 1e-3), da_kind=da,
                      integrator=IntegratorConfig(tau=tau), **kw)
    return SOLVERS[algo](plant, target, cfg, p0)


@pytest.mark.parametrize("algo,da", ALL_VARIANTS)
def test_trivial_hit_at_zero(algo, da):
    plant = ball_plant(2, s0=[1.0, -1.0])
    target = static_target([1.0, -1.0])
    out = solve(algo, da, plant, target, np.array([1.0, 0.0]))
    assert out.status is Status.TRIVIAL_HIT_AT_ZERO
    assert out.t_star == 0.0


def test_neustadt_eaton_ball_plant():
    plant = ball_plant(2)
    target = static_target([3.0, 0.0])
    eps, tau = 1e-4, 1e-3
    out = solve("ne", None, plant, target, np.array([0.6, 0.8]),
                eps=eps, tau=tau)
    assert out.status is Status.CONVERGED
    slack = eps + tau * (plant.speed_bound + target.speed_bound)
    assert abs(out.t_star - 3.0) <= slack


def test_semi_analytic_ball_plant_lower_approximation():
    plant = ball_plant(2)
    target = static_target([3.0, 0.0])
    eps = 1e-4
    out = solve("s", "sa", plant, target, np.array([0.6, 0.8]), eps=eps)
    assert out.status is Status.CONVERGED
    assert 3.0 - eps <= out.t_star <= 3.0


def test_ne_matches_semi_analytic_on_rocket():
    sc = Scenario(v0=0.0, s1=2.0, s2=1.0, v1=0.0, v2=0.0)
    plant, target = sc.problem()
    p0 = sc.initial_support()
    eps, tau = 3.0 ** -7, 1e-3
    out_ne = solve("ne", None, plant, target, p0, eps=eps, tau=tau)
    out_s = solve("s", "sa", plant, target, p0, eps=eps, tau=tau)
    assert out_ne.status is Status.CONVERGED
    assert out_s.status is Status.CONVERGED
    slack = 2.0 * (eps / plant.speed_bound + tau)
    assert abs(out_ne.t_star - out_s.t_star) <= slack


@pytest.mark.parametrize("algo,da", ALL_VARIANTS)
def test_rocket_scenario_converges_below_reference(algo, da):
    sc = Scenario(v0=0.25, s1=1.5, s2=1.0, v1=0.125, v2=-0.25)
    plant, target = sc.problem()
    p0 = sc.initial_support()
    eps = 3.0 ** -7
    out = solve(algo, da, plant, target, p0, eps=eps, tau=1e-3)
    assert out.status is Status.CONVERGED
    # independently recomputed certificate
    counters = RunCounters()
    engine = ReachEngine(plant, IntegratorConfig(tau=1e-3), counters)
    pair = frozen_pair(engine, target, out.t_star)
    est = EstimatePair.from_chord(out.p_star, pair.chord(out.p_star))
    assert est.upper <= eps
    assert np.linalg.norm(out.p_star) == pytest.approx(1.0, abs=1e-12)
    ref = reference_t_star(plant, target, tol=1e-7)
    assert out.t_star <= ref + 1e-6
    # trace times never decrease and stay below the reference
    times = [t for t, _, _ in out.trace]
    assert all(b >= a for a, b in zip(times, times[1:]))
    assert all(t <= ref + 1e-6 for t in times)


def test_semi_analytic_time_sequence_strictly_increases():
    sc = Scenario(v0=0.0, s1=-2.0, s2=1.5, v1=0.2, v2=0.1)
    plant, target = sc.problem()
    out = solve("s", "sa", plant, target, sc.initial_support())
    assert out.status is Status.CONVERGED
    times = [t for t, _, _ in out.trace]
    assert all(b > a for a, b in zip(times, times[1:]))
    assert out.counters.n_f == 0
    assert out.counters.i_f == 0.0


def test_gamma_semantics_match_da_variants():
    # gjk/g pass gamma through; sa/ga may shrink it but never below zero
    sc = Scenario(v0=0.5, s1=1.0, s2=2.0, v1=0.0, v2=0.25)
    plant, target = sc.problem()
    for da in ("gjk", "g", "sa", "ga"):
        out = solve("s", da, plant, target, sc.initial_support())
        assert out.status is Status.CONVERGED


def test_extremal_rollout_reaches_target():
    sc = Scenario(v0=0.125, s1=2.0, s2=0.5, v1=0.125, v2=0.125)
    plant, target = sc.problem()
    eps = 3.0 ** -7
    out = solve("s", "sa", plant, target, sc.initial_support(), eps=eps)
    assert out.status is Status.CONVERGED
    terminal = rk4_contact(plant, IntegratorConfig(tau=1e-3), out.t_star,
                           out.p_star)
    goal = target.contact_at(out.t_star, -out.p_star)
    assert float(np.linalg.norm(terminal - goal)) <= eps + 1e-6


def test_reference_t_star_ball():
    plant = ball_plant(2)
    target = static_target([3.0, 0.0])
    assert reference_t_star(plant, target, tol=1e-8) == pytest.approx(3.0, abs=1e-7)


def test_reference_t_star_at_origin():
    plant = ball_plant(2, s0=[0.5, 0.5])
    target = static_target([0.5, 0.5])
    assert reference_t_star(plant, target) == 0.0


def test_reference_t_star_rocket_regression():
    # frozen from a fine bisection of the certified distance sign change
    sc = Scenario(v0=0.0, s1=1.0, s2=0.0, v1=0.0, v2=0.0)
    plant, target = sc.problem()
    got = reference_t_star(plant, target, tol=1e-9)
    assert got == pytest.approx(2.1700770034, abs=2e-8)


def test_reference_t_star_unreachable():
    plant = ball_plant(2)
    target = MovingPointBody(np.array([3.0, 0.0]), np.array([2.0, 0.0]))
    with pytest.raises(ValueError, match="unreachable"):
        reference_t_star(plant, target, horizon=30.0)


def test_first_crossing_time_levels_are_ordered():
    sc = Scenario(v0=0.0, s1=2.0, s2=1.0, v1=0.0, v2=0.0)
    plant, target = sc.problem()
    eps = 3.0 ** -7
    t_eps = first_crossing_time(plant, target, level=eps, tol=1e-7)
    t_zero = reference_t_star(plant, target, tol=1e-7)
    assert t_eps <= t_zero
    # non-grazing scenario: the closing speed is order one
    assert t_zero - t_eps <= 10 * eps


def test_horizon_failure_when_target_outruns_plant():
    plant = ball_plant(2)
    target = MovingPointBody(np.array([3.0, 0.0]), np.array([2.0, 0.0]))
    cfg = MtplsConfig(epsilon=1e-4, alpha=1e-3, da_kind="sa",
                      integrator=IntegratorConfig(tau=1e-2), horizon=10.0)
    out = semi_analytic(plant, target, cfg, np.array([1.0, 0.0]))
    assert out.status is Status.FAILED
    assert out.failure is None
    assert "horizon" in out.detail


def test_boost_divergence_reported_as_call_cap():
    plant = ball_plant(2)
    target = MovingPointBody(np.array([3.0, 0.0]), np.array([2.0, 0.0]))
    cfg = MtplsConfig(epsilon=1e-4, alpha=1e-3, da_kind="sa",
                      integrator=IntegratorConfig(tau=1e-2), horizon=10.0)
    out = barr_gilbert(plant, target, cfg, np.array([1.0, 0.0]))
    assert out.status is Status.FAILED
    assert out.failure is FailureKind.BOOST_CALL_CAP


def test_failure_monitor_negative_gap():
    assert scan_events([{"delta": -1e-9}]) is FailureKind.NEGATIVE_GAP


def test_failure_monitor_time_decrease():
    events = [{"t": 1.0}, {"t": 0.999}]
    assert scan_events(events) is FailureKind.TIME_DECREASED


def test_failure_monitor_boost_cap():
    events = ({"boost_call": True} for _ in range(10_001))
    assert scan_events(events) is FailureKind.BOOST_CALL_CAP


def test_failure_monitor_clean_trace():
    events = [{"delta": 0.5, "t": 1.0, "s_norm": 2.0, "gamma": 0.5},
              {"delta": 0.4, "t": 1.5, "s_norm": 1.0, "gamma": 0.25}]
    assert scan_events(events) is None


def test_failure_monitor_simplex_conditions():
    assert scan_events([{"s_norm": 1.0}, {"s_norm": 1.0}]) is \
        FailureKind.SIMPLEX_STALLED
    assert scan_events([{"s_norm": 0.0}]) is FailureKind.SIMPLEX_COLLAPSED
    assert scan_events([{"rho_lower_certified": -1e-12}]) is \
        FailureKind.NEGATIVE_LOWER_BOUND
    assert scan_events([{"gamma": 0.0}]) is FailureKind.STEP_UNDERFLOW


def test_small_epsilon_below_tau_fails_with_monitored_condition():
    sc = Scenario(v0=0.0, s1=2.0, s2=1.0, v1=0.0, v2=0.0)
    plant, target = sc.problem()
    out = solve("bg", "sa", plant, target, sc.initial_support(),
                eps=3.0 ** -11, tau=1e-2)
    assert out.status is Status.FAILED
    assert out.failure is not None  # one of the seven coded conditions


def test_boltyanskii_step_variant_runs():
    plant = ball_plant(2)
    target = static_target([2.0, 0.0])
    cfg = MtplsConfig(epsilon=1e-2, alpha=1e-2, da_kind=None,
                      integrator=IntegratorConfig(tau=1e-2),
                      boltyanskii_step=True, boost_call_cap=200)
    out = neustadt_eaton(plant, target, cfg, np.array([0.8, 0.6]))
    # the replacement step rule is studied, not relied upon: any terminal
    # status is acceptable as long as the run completes
    assert out.status in (Status.CONVERGED, Status.FAILED)


def test_counters_are_returned_per_run():
    sc = Scenario(v0=0.0, s1=1.5, s2=0.0, v1=0.0, v2=0.0)
    plant, target = sc.problem()
    out1 = solve("bg", "sa", plant, target, sc.initial_support())
    out2 = solve("bg", "sa", plant, target, sc.initial_support())
    assert out1.counters is not out2.counters
    assert out1.counters.n_s == out2.counters.n_s
    assert out1.counters.n_f == out2.counters.n_f >= 1
    assert out1.counters.i_f == pytest.approx(out2.counters.i_f)


def test_rk4_engine_variant_agrees_with_analytic_engine():
    sc = Scenario(v0=0.25, s1=1.0, s2=0.5, v1=0.0, v2=0.0)
    plant, target = sc.problem(compiled=False)
    p0 = sc.initial_support()
    eps, tau = 3.0 ** -5, 1e-3
    cfg_a = MtplsConfig(epsilon=eps, alpha=1e-3, da_kind="sa",
                        integrator=IntegratorConfig(tau=tau), engine="analytic")
    cfg_n = MtplsConfig(epsilon=eps, alpha=1e-3, da_kind="sa",
                        integrator=IntegratorConfig(tau=tau), engine="rk4")
    out_a = semi_analytic(plant, target, cfg_a, p0)
    out_n = semi_analytic(plant, target, cfg_n, p0)
    assert out_a.status is Status.CONVERGED
    assert out_n.status is Status.CONVERGED
    assert abs(out_a.t_star - out_n.t_star) <= 1e-5
    assert out_n.counters.i_s > 0.0
