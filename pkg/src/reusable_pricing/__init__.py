"""Static versus dynamic pricing of reusable resources in a C-unit loss system."""

from .demand import PROFIT, DemandCurve, Family, Weights, myopic_rate, price_at_rate, rate_at_price
from .dynamic_opt import DynamicSolution, MdpConfig, brute_force_policy_search, solve_dynamic
from .errors import (ConvergenceError, DomainError, GuaranteeViolation, RejectedInstanceError,
                     StructuralViolation)
from .loss_chain import Instance, ObjectiveTriple, Policy, erlang_b, objectives, steady_state
from .simulator import SimConfig, SimEstimate, simulate, validate_against_analytic
from .static_policy import best_static_rate, constructed_static_rate, ratio_report

__all__ = [
    "PROFIT", "ConvergenceError", "DemandCurve", "DomainError", "DynamicSolution", "Family",
    "GuaranteeViolation", "Instance", "MdpConfig", "ObjectiveTriple", "Policy",
    "RejectedInstanceError", "SimConfig", "SimEstimate", "StructuralViolation", "Weights",
    "best_static_rate", "brute_force_policy_search", "constructed_static_rate", "erlang_b",
    "myopic_rate", "objectives", "price_at_rate", "rate_at_price", "ratio_report", "simulate",
    "solve_dynamic", "steady_state", "validate_against_analytic",
]
