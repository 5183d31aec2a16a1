"""Toric fans, smoothed support functions, their flows, and polyhedral shard sheaves."""

__version__ = "0.1.0"

from .divisor import (CartierData, SupportFunction, ToricDivisor, cartier_data, check_continuity,
                      extend_to_completion, parse_divisor, support_eval)
from .fan import Cone, Fan, dual_cone_constraints, faces, is_complete, locate, parse_fan
from .flow import FlowResult, PhasePoint, flow_closed_form, flow_front, flow_rk4
from .nearby import (FrontExperiment, front_convergence, picard_action_check, sample_conormal,
                     torus_action_check)
from .sheaf import (OpenPolyhedron, ShardComplex, ShardTerm, SSComponent, StalkReport, convolve_stalk,
                    feasible, singular_support, stalk, torus_stalk, twisted_polytope_sheaf)
from .smoothing import (Mollifier, QuadratureConfig, SmoothingEval, density, grad_smoothed_support,
                        limit_weights, region_weights, smoothed_support, verify_gradient_limit,
                        verify_limsup_containment, verify_uniform_bound)
