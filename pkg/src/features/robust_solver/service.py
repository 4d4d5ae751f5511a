"""Robust solver service - worst-case reformulation, guarding projection, inner rounding."""
from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from features.problem_core.models import Decision, FlexProblem
from features.problem_core.service import robust_margin
from features.robust_solver.models import ReformulatedProgram, SolveReport, SolverSettings
from shared.utils import DomainError

logger = logging.getLogger(__name__)

# Inner L-BFGS-B tolerances; the outer loop owns the KKT test.
_INNER_GTOL = 1e-11
_INNER_FTOL = 1e-15
_INNER_MEMORY = 20
# Penalty grows unless the violation shrinks at least this much per outer pass
_VIOLATION_DECREASE = 0.25
# Rounding guard so that exact grid values (0.3 / 0.1) are not floored one step down
_GRID_SLACK = 1e-9


def build_reformulation(problem: FlexProblem) -> ReformulatedProgram:
    """Worst-case program whose (x, beta) projection is exactly the robust feasible set."""
    return ReformulatedProgram(problem=problem)


def _augmented_lagrangian(
    w: np.ndarray, program: ReformulatedProgram, multipliers: np.ndarray, penalty: float
) -> Tuple[float, np.ndarray]:
    value, grad = program.objective(w)
    g = program.constraints(w)
    shifted = np.maximum(0.0, multipliers + penalty * g)
    value += float(shifted @ shifted - multipliers @ multipliers) / (2.0 * penalty)
    grad = grad + program.jacobian(w).T @ shifted
    return value, grad


def kkt_residual(program: ReformulatedProgram, w: np.ndarray, multipliers: np.ndarray) -> float:
    """max(primal violation, projected Lagrangian gradient, complementarity gap)."""
    _, grad = program.objective(w)
    g = program.constraints(w)
    grad_lagrangian = grad + program.jacobian(w).T @ multipliers
    projected = w - np.clip(w - grad_lagrangian, program.lower, program.upper)
    violation = max(0.0, float(np.max(g)))
    stationarity = float(np.max(np.abs(projected)))
    complementarity = float(np.max(np.abs(multipliers * g)))
    return max(violation, stationarity, complementarity)


def _polish(problem: FlexProblem, decision: Decision, bisections: int) -> Tuple[Decision, float, bool]:
    """
    Shrink beta uniformly by the smallest factor that restores worst-case feasibility.

    Returns (decision, factor, feasible); feasible is False when nominal x itself
    violates a constraint, in which case the decision comes back unchanged.
    """
    if robust_margin(problem, decision) <= 0.0:
        return decision, 1.0, True
    nominal_margin = robust_margin(problem, decision.with_beta(np.zeros(decision.n)))
    if nominal_margin > 0.0:
        logger.error("Polishing cannot restore feasibility: nominal x violates a constraint by %.3e", nominal_margin)
        return decision, 1.0, False
    low, high = 0.0, 1.0
    for _ in range(bisections):
        middle = 0.5 * (low + high)
        if robust_margin(problem, decision.with_beta(middle * decision.beta)) <= 0.0:
            low = middle
        else:
            high = middle
    logger.debug("Polished beta by factor %.9f", low)
    return decision.with_beta(low * decision.beta), low, True


def _run_multiplier_method(
    program: ReformulatedProgram, settings: SolverSettings, start: Decision
) -> SolveReport:
    w = program.initial_point(start)
    multipliers = np.zeros(program.n_constraints)
    penalty = settings.penalty_init
    previous_violation = np.inf
    iterations = 0
    residual = np.inf
    outer = 0

    for outer in range(1, settings.max_outer + 1):
        budget = max(1, min(settings.inner_max_iters, settings.max_iters - iterations))
        result = minimize(
            _augmented_lagrangian,
            w,
            args=(program, multipliers, penalty),
            jac=True,
            method="L-BFGS-B",
            bounds=program.bounds(),
            options={"maxiter": budget, "maxcor": _INNER_MEMORY, "gtol": _INNER_GTOL, "ftol": _INNER_FTOL},
        )
        w = result.x
        iterations += int(result.nit)
        g = program.constraints(w)
        multipliers = np.clip(multipliers + penalty * g, 0.0, settings.multiplier_cap)
        residual = kkt_residual(program, w, multipliers)
        violation = max(0.0, float(np.max(g)))
        logger.debug(
            "outer %d: penalty=%.1e violation=%.3e kkt=%.3e inner=%d",
            outer, penalty, violation, residual, result.nit,
        )
        if residual <= settings.tol:
            break
        if iterations >= settings.max_iters:
            break
        if violation > _VIOLATION_DECREASE * previous_violation:
            penalty = min(penalty * settings.penalty_growth, settings.penalty_max)
        previous_violation = violation

    converged = bool(residual <= settings.tol)
    if not converged:
        logger.warning(
            "Robust solve stopped without convergence: kkt=%.3e after %d iterations", residual, iterations
        )

    decision, factor, feasible = _polish(program.problem, program.decision(w), settings.polish_bisections)
    converged = converged and feasible
    polished = program.initial_point(decision)
    value, _ = program.objective(polished)
    return SolveReport(
        decision=decision,
        objective_value=value,
        kkt_residual=residual,
        iterations=iterations,
        converged=converged,
        multipliers=multipliers,
        shrink_factor=factor,
        outer_iterations=outer,
        feasible=feasible,
    )


def solve_reformulation(
    program: ReformulatedProgram,
    settings: Optional[SolverSettings] = None,
    start: Optional[Decision] = None,
) -> SolveReport:
    """
    Solve the worst-case program by the method of multipliers.

    Each outer pass minimizes the augmented Lagrangian over the bound set
    (beta, s, t >= 0) with L-BFGS-B, then takes a clipped multiplier ascent step.
    The returned decision is polished to worst-case feasibility.
    """
    settings = settings or SolverSettings()
    problem = program.problem
    if start is None:
        start = Decision(x=problem.x_ref.copy(), beta=np.zeros(problem.n))
    report = _run_multiplier_method(program, settings, start)
    logger.info(
        "Robust solve: objective=%.6f kkt=%.2e iterations=%d converged=%s",
        report.objective_value, report.kkt_residual, report.iterations, report.converged,
    )
    return report


def guard_project(
    problem: FlexProblem, y_T: Decision, settings: Optional[SolverSettings] = None
) -> SolveReport:
    """Euclidean projection of y_T onto the robust feasible set (in y = (x, beta))."""
    settings = settings or SolverSettings()
    if robust_margin(problem, y_T) <= 0.0:
        return SolveReport(
            decision=y_T,
            objective_value=0.0,
            kkt_residual=0.0,
            iterations=0,
            converged=True,
        )
    program = ReformulatedProgram(problem=problem, target=y_T)
    report = _run_multiplier_method(program, settings, y_T)
    logger.info(
        "Guarding projection: moved %.6f, kkt=%.2e, converged=%s",
        report.decision.distance(y_T), report.kkt_residual, report.converged,
    )
    return report


def inner_round(decision: Decision, resolution: float) -> Decision:
    """Floor every beta_i to the resolution grid; x is untouched."""
    if resolution <= 0:
        raise DomainError("resolution must be positive")
    steps = np.floor(decision.beta / resolution + _GRID_SLACK)
    rounded = np.minimum(np.maximum(steps, 0.0) * resolution, decision.beta)
    return decision.with_beta(rounded)
