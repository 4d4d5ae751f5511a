"""Saddle dynamics service - stochastic (B-PD) and model-based (MS-PD) primal-dual runs."""
from __future__ import annotations

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from features.problem_core.models import FlexProblem
from features.problem_core.service import eval_objective
from features.response_models.models import ResponseModel
from features.response_models.service import (
    expected_constraint_values,
    factorized_law,
    sample_response,
)
from features.saddle_dynamics.lagrangian import grad_phi, mean_grad_phi
from features.saddle_dynamics.models import (
    ChanceParams,
    ConstantsReport,
    IterateTrace,
    SaddlePoint,
    SearchRegion,
    TraceRecord,
)
from shared.constants import (
    QUADRATURE_NODES,
    REFERENCE_BACKTRACK_WINDOW,
    REFERENCE_MAX_ITERS,
    REFERENCE_TOLERANCE,
)
from shared.utils import DomainError, ReferenceNonConvergenceError

logger = logging.getLogger(__name__)

# Gradient oracle: p_k -> (grad_y, grad_lambda)
GradientOracle = Callable[[SaddlePoint], Tuple[np.ndarray, np.ndarray]]

# Smallest fraction of the initial step size the reference computation backtracks to
_MIN_ETA_FRACTION = 2.0 ** -30


def projected_step(region: SearchRegion, point: SaddlePoint, grad_y: np.ndarray,
                   grad_lambda: np.ndarray, eta: float) -> SaddlePoint:
    """Descent in y, ascent in lambda, then clipping onto the search region."""
    p = point.stacked()
    direction = np.concatenate([-grad_y, grad_lambda])
    if region.dual_frozen:
        direction[2 * point.n:] = 0.0
    return SaddlePoint.from_stacked(region.project_stacked(p + eta * direction), point.n)


class _TraceRecorder:
    """Builds trace records with the optional distance and CV columns."""

    def __init__(self, problem: FlexProblem, reference: Optional[SaddlePoint],
                 cv_model: Optional[ResponseModel], nodes: int):
        self.problem = problem
        self.reference = reference
        self.cv_model = cv_model
        self.nodes = nodes
        self.trace = IterateTrace()

    def record(self, k: int, point: SaddlePoint) -> None:
        dist = saddle = cv = None
        if self.reference is not None:
            dist = point.y.distance(self.reference.y)
            saddle = point.distance(self.reference)
        if self.cv_model is not None:
            law = factorized_law(self.cv_model, point.y, self.nodes)
            cv = float(np.max(expected_constraint_values(self.problem, law, point.y)))
        self.trace.append(TraceRecord(
            k=k,
            y=point.y,
            lam=point.lam,
            objective=eval_objective(self.problem, point.y),
            dist_to_ref=dist,
            saddle_dist=saddle,
            cv_estimate=cv,
        ))


def _check_run(problem: FlexProblem, region: SearchRegion, eta: float, steps: int) -> None:
    if eta <= 0:
        raise DomainError("step size eta must be positive")
    if steps < 0:
        raise DomainError("iteration budget must be nonnegative")
    if region.n != problem.n or region.m != problem.m:
        raise DomainError("search region does not match the problem dimensions")


def bpd_run(
    problem: FlexProblem,
    chance: ChanceParams,
    region: SearchRegion,
    model: ResponseModel,
    eta: float,
    K: int,
    rng: np.random.Generator,
    start: Optional[SaddlePoint] = None,
    reference: Optional[SaddlePoint] = None,
    cv_model: Optional[ResponseModel] = None,
    nodes: int = QUADRATURE_NODES,
) -> IterateTrace:
    """
    Stochastic primal-dual: each iteration announces y_k, observes one response
    z_k ~ D(y_k) and takes a projected gradient step on phi(., ., z_k).

    Returns K + 1 records (the start plus every iterate).
    """
    _check_run(problem, region, eta, K)
    point = region.project(start) if start is not None else region.origin(problem)
    recorder = _TraceRecorder(problem, reference, cv_model, nodes)
    recorder.record(0, point)
    for k in range(1, K + 1):
        z = sample_response(model, point.y, rng)
        grad_y, grad_lambda = grad_phi(problem, chance, point, z)
        point = projected_step(region, point, grad_y, grad_lambda, eta)
        recorder.record(k, point)
    logger.debug("B-PD finished %d iterations", K)
    return recorder.trace


def mean_step_oracle(problem: FlexProblem, chance: ChanceParams, model: ResponseModel,
                     nodes: int = QUADRATURE_NODES) -> GradientOracle:
    """Exact expected gradient under the model's law at the current decision."""
    def oracle(point: SaddlePoint) -> Tuple[np.ndarray, np.ndarray]:
        law = factorized_law(model, point.y, nodes)
        return mean_grad_phi(problem, chance, point, law)
    return oracle


def mspd_run(
    problem: FlexProblem,
    chance: ChanceParams,
    region: SearchRegion,
    model_ms: ResponseModel,
    eta: float,
    T: int,
    start: Optional[SaddlePoint] = None,
    reference: Optional[SaddlePoint] = None,
    cv_model: Optional[ResponseModel] = None,
    stop_tol: float = 0.0,
    nodes: int = QUADRATURE_NODES,
) -> IterateTrace:
    """
    Model-based primal-dual: gradients are exact expectations under the model law
    at the current decision. Runs T steps, or stops early once a step moves the
    point by at most stop_tol.
    """
    _check_run(problem, region, eta, T)
    oracle = mean_step_oracle(problem, chance, model_ms, nodes)
    point = region.project(start) if start is not None else region.origin(problem)
    recorder = _TraceRecorder(problem, reference, cv_model, nodes)
    recorder.record(0, point)
    for k in range(1, T + 1):
        grad_y, grad_lambda = oracle(point)
        following = projected_step(region, point, grad_y, grad_lambda, eta)
        step = following.distance(point)
        point = following
        recorder.record(k, point)
        if step <= stop_tol:
            logger.debug("MS-PD stopped at iteration %d (step %.3e)", k, step)
            break
    return recorder.trace


def compute_reference_equilibrium(
    problem: FlexProblem,
    chance: ChanceParams,
    region: SearchRegion,
    true_model: ResponseModel,
    eta: float,
    tol: float = REFERENCE_TOLERANCE,
    max_iters: int = REFERENCE_MAX_ITERS,
    start: Optional[SaddlePoint] = None,
    constants: Optional[ConstantsReport] = None,
    nodes: int = QUADRATURE_NODES,
    window: int = REFERENCE_BACKTRACK_WINDOW,
) -> SaddlePoint:
    """
    Fixed point of the projected mean primal-dual map under the true model.

    The fixed point does not depend on eta, so eta is halved whenever the scaled
    step ||p_{k+1} - p_k|| / eta fails to decrease over a window. The stop test and
    the reported residual are step * eta / current_eta, which bounds the step of the
    map at the requested eta.
    """
    _check_run(problem, region, eta, max_iters)
    if max_iters < 1:
        raise DomainError("the reference computation needs at least one iteration")
    if constants is not None and not constants.valid:
        logger.warning(
            "eps*L/mu = %.3f >= 1: the reference equilibrium may not be unique",
            constants.eps * constants.L / max(constants.mu, 1e-300),
        )
    oracle = mean_step_oracle(problem, chance, true_model, nodes)
    point = region.project(start) if start is not None else region.origin(problem)
    current_eta = eta
    window_start = np.inf
    step = residual = np.inf
    for k in range(1, max_iters + 1):
        grad_y, grad_lambda = oracle(point)
        following = projected_step(region, point, grad_y, grad_lambda, current_eta)
        step = following.distance(point)
        residual = step * eta / current_eta
        if residual <= tol:
            logger.info("Reference equilibrium reached after %d iterations (eta=%.3g)", k, current_eta)
            return point
        point = following
        if k % window == 0:
            scaled = step / current_eta
            if scaled >= window_start:
                if current_eta <= eta * _MIN_ETA_FRACTION:
                    break
                current_eta *= 0.5
                logger.warning("Reference iteration stalled at step %.3e; halving eta to %.3g", step, current_eta)
                window_start = np.inf
            else:
                window_start = scaled
    raise ReferenceNonConvergenceError(residual=float(residual), iterations=k)
