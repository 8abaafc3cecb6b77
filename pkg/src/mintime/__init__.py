"""Minimum-time solvers for linear systems.

Contact-function geometry for strictly convex sets, four minimal-distance
algorithms, three minimum-time solvers with a breakdown monitor, and the
isotropic-rocket benchmark harness.
"""

from .counters import (ComplexityWeights, RunCounters, complexity_type_a,
                       complexity_type_b, complexity_type_c)
from .distance import (MdpConfig, MdpOutcome, gilbert_distance, gjk_distance,
                       gjk_star, gradient_ascent, steepest_ascent)
from .dynamics import (BoostDiverged, IntegratorConfig, LinearPlant,
                       ReachEngine, adjoint_flow_const, ball_plant,
                       frozen_pair, rho_lower_time_derivative, rk4_boost,
                       rk4_contact)
from .estimates import (BodyPair, EstimatePair, ascent_direction,
                        brute_force_distance, estimate, rho_lower, rho_upper,
                        simple_boost, step_exponent, xi_prime)
from .failures import Failure, FailureKind, FailureMonitor, scan_events
from .geometry import (BallBody, MovingPointBody, PointBody, ball_contact,
                       moving_point_contact, support_gap, unit_support)
from .johnson import nearest_in_hull
from .rocket import (Scenario, rocket_adjoint, rocket_contact, rocket_phi,
                     rocket_plant, rocket_u_extremal)
from .solvers import (MtplsConfig, MtplsOutcome, Status, barr_gilbert,
                      first_crossing_time, neustadt_eaton, reference_t_star,
                      semi_analytic)

__version__ = "0.1.0"
