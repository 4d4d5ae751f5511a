"""Saddle dynamics feature exports."""
from features.saddle_dynamics.bounds import (
    contraction_factor,
    convergence_bounds,
    estimate_constants,
    estimate_mu_L,
    step_size_range,
)
from features.saddle_dynamics.lagrangian import (
    grad_phi,
    grad_phi_batch,
    mean_grad_phi,
    phi_value,
    saddle_field,
)
from features.saddle_dynamics.metrics import (
    ChanceViolation,
    chance_violation_probability,
    chernoff_terms,
    constraint_violation_metric,
)
from features.saddle_dynamics.models import (
    ChanceParams,
    ConstantsReport,
    ConvergenceBounds,
    IterateTrace,
    MuLEstimate,
    SaddlePoint,
    SearchRegion,
    StepSizeRange,
    TraceRecord,
)
from features.saddle_dynamics.service import (
    bpd_run,
    compute_reference_equilibrium,
    mean_step_oracle,
    mspd_run,
    projected_step,
)

__all__ = [
    "ChanceParams",
    "ChanceViolation",
    "ConstantsReport",
    "ConvergenceBounds",
    "IterateTrace",
    "MuLEstimate",
    "SaddlePoint",
    "SearchRegion",
    "StepSizeRange",
    "TraceRecord",
    "bpd_run",
    "chance_violation_probability",
    "chernoff_terms",
    "compute_reference_equilibrium",
    "constraint_violation_metric",
    "contraction_factor",
    "convergence_bounds",
    "estimate_constants",
    "estimate_mu_L",
    "grad_phi",
    "grad_phi_batch",
    "mean_grad_phi",
    "mean_step_oracle",
    "mspd_run",
    "phi_value",
    "projected_step",
    "saddle_field",
    "step_size_range",
]
