"""Problem core feature module."""
from features.problem_core.corridor import build_corridor
from features.problem_core.models import (
    ConstraintValues,
    Decision,
    DecisionBox,
    FlexProblem,
    RobustCertificate,
)
from features.problem_core.service import (
    constraint_values_batch,
    eval_constraints,
    eval_objective,
    objective_gradient,
    realize,
    robust_margin,
    vertex_feasibility_oracle,
    worst_case_affine_margin,
    worst_case_constraints,
    worst_case_norm_envelope,
)

__all__ = [
    "ConstraintValues",
    "Decision",
    "DecisionBox",
    "FlexProblem",
    "RobustCertificate",
    "build_corridor",
    "constraint_values_batch",
    "eval_constraints",
    "eval_objective",
    "objective_gradient",
    "realize",
    "robust_margin",
    "vertex_feasibility_oracle",
    "worst_case_affine_margin",
    "worst_case_constraints",
    "worst_case_norm_envelope",
]
