"""Algebraic polynomial Stein operators for polynomials of Gaussian vectors."""

from .analytics import (
    charfn_ode,
    charfn_pole_classify,
    charfn_residual,
    gamma_characterization_check,
    stein_identity_check,
    validate_operator,
)
from .chain import SteinOperator, backward_validate, forward_replay, moment_conditions, top_coefficient_check
from .control import (
    CY,
    GENERIC,
    ControlSolution,
    NotReachable,
    all_null_controls,
    combine_generic_zero_order,
    find_null_control,
    min_degree_search,
    min_order_search,
)
from .hermite import cumulant, expect, hermite, moments
from .io import OperatorDocument, parse_target
from .malliavin import MODIFIED, STANDARD, TargetSpec, delta, gamma, modified_pseudo_inverse, pseudo_inverse
from .poly import Poly, format_poly, parse_poly

__all__ = [
    "CY",
    "GENERIC",
    "MODIFIED",
    "STANDARD",
    "ControlSolution",
    "NotReachable",
    "OperatorDocument",
    "Poly",
    "SteinOperator",
    "TargetSpec",
    "all_null_controls",
    "backward_validate",
    "charfn_ode",
    "charfn_pole_classify",
    "charfn_residual",
    "combine_generic_zero_order",
    "cumulant",
    "delta",
    "expect",
    "find_null_control",
    "format_poly",
    "forward_replay",
    "gamma",
    "gamma_characterization_check",
    "hermite",
    "min_degree_search",
    "min_order_search",
    "modified_pseudo_inverse",
    "moment_conditions",
    "moments",
    "parse_poly",
    "parse_target",
    "pseudo_inverse",
    "stein_identity_check",
    "top_coefficient_check",
    "validate_operator",
]
