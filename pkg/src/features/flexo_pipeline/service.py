"""Flex-O pipeline service - robust warm start, model-based steps, guarding and rounding."""
from __future__ import annotations

import logging
from typing import Callable, List, Optional, Tuple, TypeVar

import numpy as np

from features.flexo_pipeline.models import FlexibleAssignment, PipelineConfig
from features.problem_core.models import Decision, FlexProblem, RobustCertificate
from features.problem_core.service import vertex_feasibility_oracle, worst_case_constraints
from features.response_models.models import ResponseModel
from features.robust_solver.service import (
    build_reformulation,
    guard_project,
    inner_round,
    solve_reformulation,
)
from features.saddle_dynamics.metrics import constraint_violation_metric
from features.saddle_dynamics.models import IterateTrace, SaddlePoint, TraceRecord
from features.saddle_dynamics.service import mspd_run
from shared.constants import SOLVER_FEASIBILITY_TOLERANCE
from shared.utils import FlexoError, StageError

logger = logging.getLogger(__name__)

Result = TypeVar("Result")


def _stage(name: str, action: Callable[[], Result]) -> Result:
    try:
        return action()
    except StageError:
        raise
    except (FlexoError, ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        logger.error("Flex-O stage '%s' failed: %s", name, exc)
        raise StageError(name, exc) from exc


def certify(problem: FlexProblem, decision: Decision, cap: int,
            tol: float = SOLVER_FEASIBILITY_TOLERANCE) -> RobustCertificate:
    """Vertex-oracle certificate, or the closed-form worst case beyond the oracle cap."""
    if problem.n <= cap:
        return vertex_feasibility_oracle(problem, decision, tol=tol, cap=cap)
    worst = worst_case_constraints(problem, decision)
    index = int(np.argmax(worst))
    return RobustCertificate(
        feasible=bool(worst[index] <= tol),
        worst_vertex=(),
        worst_margin=float(worst[index]),
        worst_constraint=index,
        tolerance=tol,
    )


def run_flexo(
    problem: FlexProblem,
    config: PipelineConfig,
    true_model: Optional[ResponseModel] = None,
    reference: Optional[SaddlePoint] = None,
) -> Tuple[FlexibleAssignment, IterateTrace]:
    """
    Run the five Flex-O steps in order.

    1. robust solve; 2. T model-based primal-dual steps from the robust solution;
    3. guarding projection (config.guard); 4. inner rounding of beta (config.round);
    5. per-user intervals. With T = 0 the model stage is skipped and the trace holds
    only the robust point. A true model, when given, feeds the CV column of the
    trace and the final CV estimate.
    """
    robust = _stage("robust", lambda: solve_reformulation(build_reformulation(problem), config.solver))
    assignment = FlexibleAssignment(decision=robust.decision, robust_converged=robust.converged)
    assignment.provenance["robust"] = robust.decision
    logger.info("Flex-O robust stage done: sum(beta)=%.4f", float(np.sum(robust.decision.beta)))
    worst = float(np.max(worst_case_constraints(problem, robust.decision)))
    if worst > SOLVER_FEASIBILITY_TOLERANCE:
        logger.warning("Robust warm start is not worst-case feasible (margin %.3e); continuing", worst)

    start = SaddlePoint(y=robust.decision, lam=np.zeros(problem.m))
    if config.T > 0:
        trace = _stage("mspd", lambda: mspd_run(
            problem, config.chance, config.region, config.model_ms, config.eta, config.T,
            start=start, reference=reference, cv_model=true_model, nodes=config.nodes,
        ))
        y_T = trace.final.y
        assignment.provenance["mspd"] = y_T
        logger.info("Flex-O MS-PD stage done after %d steps", len(trace) - 1)
    else:
        trace = IterateTrace()
        trace.append(TraceRecord(
            k=0,
            y=robust.decision,
            lam=start.lam,
            objective=robust.objective_value,
            dist_to_ref=robust.decision.distance(reference.y) if reference is not None else None,
            saddle_dist=start.distance(reference) if reference is not None else None,
        ))
        y_T = robust.decision

    decision = y_T
    if config.guard:
        guarded = _stage("guard", lambda: guard_project(problem, y_T, config.solver))
        decision = guarded.decision
        assignment.guard_converged = guarded.converged
        assignment.provenance["guard"] = decision
        logger.info("Flex-O guard applied: moved %.6f", decision.distance(y_T))

    if config.round:
        decision = _stage("round", lambda: inner_round(decision, config.resolution))
        assignment.provenance["round"] = decision

    assignment.decision = decision
    if config.guard:
        assignment.certificate = certify(problem, decision, config.oracle_cap)
    if true_model is not None:
        assignment.cv_estimate = constraint_violation_metric(
            problem, [decision], true_model, method="exact", window=1, nodes=config.nodes
        )
    return assignment, trace


def emit_user_sets(assignment: FlexibleAssignment) -> List[dict]:
    """One record per user: user, center, radius, lower, upper."""
    return [interval.to_dict() for interval in assignment.intervals]
