"""Discrete-time NPZ ecosystem dynamics as a quadratic stochastic operator on the 2-simplex."""

from .analysis import (
    FixedPointRecord,
    Regime,
    StabilityClass,
    classify_fixed_point,
    eigenvalues_2x2,
    enumerate_fixed_points,
    invariant_set_membership,
    jacobian_reduced,
    regime,
    two_periodic_discriminant,
)
from .dynamics import (
    LimitPrediction,
    NotConverged,
    Trajectory,
    converge,
    iterate,
    predict_limit,
    regularity_sweep,
    verify_prediction,
)
from .operators import (
    ReducedPoint,
    apply,
    apply_reduced,
    apply_via_tensor,
    restriction_f,
    restriction_g,
    restriction_phi,
    z_recursion,
)
from .simplex_core import (
    CubicCoefficients,
    ModelParameters,
    SimplexPoint,
    check_l_volterra,
    check_stochastic_conditions,
    derive_coefficients,
    make_point,
    max_uptake_preserving_simplex,
    require_admissible,
    validate_parameters,
)

__version__ = "0.1.0"

__all__ = [
    "FixedPointRecord",
    "Regime",
    "StabilityClass",
    "classify_fixed_point",
    "eigenvalues_2x2",
    "enumerate_fixed_points",
    "invariant_set_membership",
    "jacobian_reduced",
    "regime",
    "two_periodic_discriminant",
    "LimitPrediction",
    "NotConverged",
    "Trajectory",
    "converge",
    "iterate",
    "predict_limit",
    "regularity_sweep",
    "verify_prediction",
    "ReducedPoint",
    "apply",
    "apply_reduced",
    "apply_via_tensor",
    "restriction_f",
    "restriction_g",
    "restriction_phi",
    "z_recursion",
    "CubicCoefficients",
    "ModelParameters",
    "SimplexPoint",
    "check_l_volterra",
    "check_stochastic_conditions",
    "derive_coefficients",
    "make_point",
    "max_uptake_preserving_simplex",
    "require_admissible",
    "validate_parameters",
]
