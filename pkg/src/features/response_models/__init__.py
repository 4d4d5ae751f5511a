"""Response models feature exports."""
from features.response_models.estimators import (
    estimate_lipschitz_eps,
    estimate_misspecification_bound,
    estimate_sigma,
    slope_bounds,
)
from features.response_models.models import (
    ExpectationRequest,
    FactorizedLaw,
    LipschitzEstimate,
    MisspecificationEstimate,
    NoiseSpec,
    ResponseModel,
    SigmaEstimate,
)
from features.response_models.service import (
    ChernoffMoments,
    chernoff_moments,
    coupled_responses,
    expect_exp_constraint,
    expected_constraint_values,
    factorized_law,
    mean_gradient_inputs,
    sample_exp_constraint,
    sample_response,
    sample_responses,
)

__all__ = [
    "ChernoffMoments",
    "ExpectationRequest",
    "FactorizedLaw",
    "LipschitzEstimate",
    "MisspecificationEstimate",
    "NoiseSpec",
    "ResponseModel",
    "SigmaEstimate",
    "chernoff_moments",
    "coupled_responses",
    "estimate_lipschitz_eps",
    "estimate_misspecification_bound",
    "estimate_sigma",
    "expect_exp_constraint",
    "expected_constraint_values",
    "factorized_law",
    "mean_gradient_inputs",
    "sample_exp_constraint",
    "sample_response",
    "sample_responses",
    "slope_bounds",
]
