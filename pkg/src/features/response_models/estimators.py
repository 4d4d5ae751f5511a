"""Estimators for the distribution-map constants eps (Lipschitz), sigma (noise) and B (misspecification)."""
from __future__ import annotations

import logging
from typing import Callable, Optional, Tuple

import numpy as np

from features.problem_core.models import Decision, DecisionBox
from features.response_models.models import (
    LipschitzEstimate,
    MisspecificationEstimate,
    ResponseModel,
    SigmaEstimate,
)
from features.response_models.service import coupled_responses, sample_responses
from shared.constants import DEFAULT_ESTIMATOR_POINTS
from shared.utils import DomainError

logger = logging.getLogger(__name__)

# Relative size of the local perturbation used for half of the Lipschitz pairs
_LOCAL_STEP = 1e-3

# (p, Z) -> (grad_y per sample, grad_lambda per sample)
PhiGradients = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


def _shift_stacked(model: ResponseModel, Y: np.ndarray) -> np.ndarray:
    half = Y.shape[1] // 2
    return model.shift(Y[:, :half], Y[:, half:])


def slope_bounds(model: ResponseModel, region: DecisionBox) -> Tuple[float, float]:
    """
    Closed-form bounds on the slope of Psi over the region.

    Returns (Euclidean bound, larger single partial derivative). Each Psi_i depends
    on (x_i, beta_i) only, so the Jacobian is block diagonal and its norm is the
    largest per-user gradient norm.
    """
    beta_max = float(np.max(region.beta_upper))
    if model.kind == "custom-additive":
        partial = max(abs(model.x_slope), abs(model.beta_slope))
        return float(np.hypot(model.x_slope, model.beta_slope)), float(partial)
    if model.kind == "misspecified-linear":
        reach = np.maximum(np.abs(region.x_lower - model.pivot), np.abs(region.x_upper - model.pivot))
    else:
        reach = np.maximum.reduce([
            model.lower - region.x_lower,
            region.x_upper - model.upper,
            np.zeros(region.n),
        ])
    d_max = float(np.max(reach))
    return float(np.hypot(beta_max, d_max)), max(beta_max, d_max)


def estimate_lipschitz_eps(
    model: ResponseModel, region: DecisionBox, pair_count: int, rng: np.random.Generator
) -> LipschitzEstimate:
    """Max ratio ||Psi(y) - Psi(y')|| / ||y - y'|| over sampled pairs, alongside the slope bound."""
    if pair_count < 1:
        raise DomainError("pair_count must be at least 1")
    far = pair_count // 2
    near = pair_count - far
    first = region.sample(rng, pair_count)
    width = region.upper - region.lower
    second = np.vstack([
        region.sample(rng, far),
        np.clip(first[far:] + _LOCAL_STEP * width * rng.uniform(-1.0, 1.0, size=(near, first.shape[1])),
                region.lower, region.upper),
    ])
    gaps = np.linalg.norm(first - second, axis=1)
    moved = gaps > 0
    shifts = np.linalg.norm(_shift_stacked(model, first) - _shift_stacked(model, second), axis=1)
    sampled = float(np.max(shifts[moved] / gaps[moved])) if np.any(moved) else 0.0
    upper, partial = slope_bounds(model, region)
    logger.debug("Lipschitz estimate for %s: sampled=%.4f bound=%.4f", model.kind, sampled, upper)
    return LipschitzEstimate(sampled=sampled, upper_bound=upper, partial_bound=partial, pair_count=pair_count)


def estimate_sigma(
    model: ResponseModel,
    phi_gradients: PhiGradients,
    region,
    samples: int,
    rng: np.random.Generator,
    points: int = DEFAULT_ESTIMATOR_POINTS,
) -> SigmaEstimate:
    """
    Empirical sigma of the stochastic gradients.

    region must provide y_box (a DecisionBox) and sample(rng, count) returning
    stacked saddle points p = (x, beta, lambda). At each sampled p the mean
    deviation E||grad - E grad|| is measured per block; sigma is sqrt(2) times the
    largest block deviation seen.
    """
    n = region.y_box.n
    if model.deterministic:
        return SigmaEstimate(sigma=0.0, y_deviation=0.0, lambda_deviation=0.0, points=points, samples=samples)
    worst = (0.0, 0.0, np.zeros(0))
    for p in region.sample(rng, points):
        decision = Decision.from_stacked(p[:2 * n])
        Z = sample_responses(model, decision, rng, samples)
        grad_y, grad_lambda = phi_gradients(p, Z)
        y_dev = float(np.mean(np.linalg.norm(grad_y - grad_y.mean(axis=0), axis=1)))
        lambda_dev = float(np.mean(np.linalg.norm(grad_lambda - grad_lambda.mean(axis=0), axis=1)))
        if max(y_dev, lambda_dev) > max(worst[0], worst[1]):
            worst = (y_dev, lambda_dev, p.copy())
    sigma = float(np.sqrt(2.0) * max(worst[0], worst[1]))
    logger.info("sigma estimate %.4f from %d points x %d samples", sigma, points, samples)
    return SigmaEstimate(
        sigma=sigma,
        y_deviation=worst[0],
        lambda_deviation=worst[1],
        worst_point=worst[2],
        points=points,
        samples=samples,
    )


def estimate_misspecification_bound(
    true_model: ResponseModel,
    ms_model: ResponseModel,
    region: DecisionBox,
    samples: int,
    rng: np.random.Generator,
    points: int = DEFAULT_ESTIMATOR_POINTS,
    extra_points: Optional[np.ndarray] = None,
) -> MisspecificationEstimate:
    """
    Upper bound on sup_y W1(D_ms(y), D(y)) through the common-noise coupling.

    Both responses reuse the same standard-normal draws; the mean distance of any
    coupling bounds W1 from above. Points are region samples, the two extreme corners
    of the box and any extra stacked points supplied.
    """
    n = region.n
    candidates = [region.sample(rng, points), region.lower[None, :], region.upper[None, :]]
    if extra_points is not None:
        candidates.append(np.atleast_2d(extra_points))
    best, best_point = 0.0, ()
    for y in np.vstack(candidates):
        decision = Decision.from_stacked(y)
        noise = rng.standard_normal((samples, n))
        gap = coupled_responses(true_model, decision, noise) - coupled_responses(ms_model, decision, noise)
        distance = float(np.mean(np.linalg.norm(gap, axis=1)))
        if distance > best:
            best, best_point = distance, tuple(float(v) for v in y)
    cap = 2.0 * float(np.sqrt(n))
    logger.info("misspecification bound %.4f (support cap %.4f)", best, cap)
    return MisspecificationEstimate(
        bound=best, trivial_cap=cap, worst_point=best_point, points=points, samples=samples
    )
