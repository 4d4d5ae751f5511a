"""Convergence constants: step-size range, contraction factor, error balls and their estimation."""
from __future__ import annotations

import logging
import math
from typing import Optional

import numpy as np

from features.problem_core.models import FlexProblem
from features.response_models.estimators import (
    estimate_lipschitz_eps,
    estimate_misspecification_bound,
    estimate_sigma,
)
from features.response_models.models import ResponseModel
from features.saddle_dynamics.lagrangian import grad_phi_batch, saddle_field
from features.saddle_dynamics.models import (
    ChanceParams,
    ConstantsReport,
    ConvergenceBounds,
    MuLEstimate,
    SaddlePoint,
    SearchRegion,
    StepSizeRange,
)
from shared.constants import (
    DEFAULT_ESTIMATOR_POINTS,
    DEFAULT_ESTIMATOR_SAMPLES,
    DEFAULT_PAIR_COUNT,
)
from shared.utils import DomainError

logger = logging.getLogger(__name__)

# Central-difference step for the Jacobian columns of psi
_FD_STEP = 1e-6
# Points at which the Jacobian is sampled, out of the sampled pairs
_JACOBIAN_POINTS = 20


def step_size_range(mu: float, L: float, eps: float) -> StepSizeRange:
    """(0, 2(mu - eps L) / (L^2 (1 - eps^2))); empty when eps L >= mu or eps >= 1."""
    if mu <= 0 or L <= 0:
        raise DomainError("mu and L must be positive")
    if eps < 0:
        raise DomainError("eps must be nonnegative")
    if eps * L >= mu or eps >= 1.0:
        return StepSizeRange(low=0.0, high=0.0, empty=True)
    high = 2.0 * (mu - eps * L) / (L ** 2 * (1.0 - eps ** 2))
    return StepSizeRange(low=0.0, high=high, empty=False)


def contraction_factor(eta: float, mu: float, L: float, eps: float) -> float:
    radicand = 1.0 - 2.0 * eta * mu + (eta * L) ** 2
    return math.sqrt(max(radicand, 0.0)) + eta * eps * L


def convergence_bounds(constants: ConstantsReport, eta: float) -> ConvergenceBounds:
    """Contraction factor and both error-ball radii; balls are infinite when rho >= 1."""
    if eta <= 0:
        raise DomainError("eta must be positive")
    rho = constants.rho(eta)
    valid = rho < 1.0
    if not valid:
        logger.warning("Contraction factor rho = %.6f >= 1 at eta = %.4g; error balls are void", rho, eta)
    return ConvergenceBounds(
        rho=rho,
        ball_stochastic=constants.ball_stochastic(eta),
        ball_model=constants.ball_model(eta),
        valid=valid,
    )


def _inner_points(region: SearchRegion, rng: np.random.Generator, count: int) -> np.ndarray:
    """Uniform points kept one finite-difference step away from the region faces."""
    lower = region.lower + 2 * _FD_STEP
    upper = np.maximum(region.upper - 2 * _FD_STEP, lower)
    if region.dual_frozen:
        lower[2 * region.n:] = upper[2 * region.n:] = 0.0
    return rng.uniform(lower, upper, size=(count, lower.shape[0]))


def _jacobian_norm(function, point: np.ndarray, columns: np.ndarray) -> float:
    """Spectral norm of the central-difference Jacobian of function over the given coordinates."""
    slices = []
    for column in columns:
        offset = np.zeros_like(point)
        offset[column] = _FD_STEP
        slices.append((function(point + offset) - function(point - offset)) / (2 * _FD_STEP))
    return float(np.linalg.norm(np.column_stack(slices), ord=2))


def estimate_mu_L(
    problem: FlexProblem,
    chance: ChanceParams,
    region: SearchRegion,
    samples: int,
    rng: np.random.Generator,
) -> MuLEstimate:
    """
    mu from the analytic curvature floor; L as a sampled lower estimate.

    L is the largest of: ratios ||psi(p; z) - psi(p'; z)|| / ||p - p'|| over
    sampled pairs with a shared z, and spectral norms of the finite-difference
    Jacobians of psi in p and in z at sampled points. With lambda_max = 0 only the
    primal block is sampled and mu drops the nu term.
    """
    if samples < 1:
        raise DomainError("samples must be at least 1")
    n, m = problem.n, problem.m
    frozen = region.dual_frozen
    rows = slice(0, 2 * n) if frozen else slice(None)
    mu = problem.strong_convexity if frozen else min(problem.strong_convexity, chance.nu)

    def psi(p: np.ndarray, z: np.ndarray) -> np.ndarray:
        return saddle_field(problem, chance, p, z)[rows]

    first = _inner_points(region, rng, samples)
    second = _inner_points(region, rng, samples)
    Z = rng.uniform(-1.0, 1.0, size=(samples, n))
    best = 0.0
    for p, q, z in zip(first, second, Z):
        gap = float(np.linalg.norm(p - q))
        if gap > 0:
            best = max(best, float(np.linalg.norm(psi(p, z) - psi(q, z))) / gap)

    p_columns = np.arange(2 * n) if frozen else np.arange(2 * n + m)
    for p, z in zip(first[:_JACOBIAN_POINTS], Z[:_JACOBIAN_POINTS]):
        best = max(best, _jacobian_norm(lambda point: psi(point, z), p, p_columns))
        if not frozen:
            z_inner = np.clip(z, -1.0 + 2 * _FD_STEP, 1.0 - 2 * _FD_STEP)
            best = max(best, _jacobian_norm(lambda zz: psi(p, zz), z_inner, np.arange(n)))

    logger.info("Estimated mu = %.4g, L = %.4g from %d samples", mu, best, samples)
    return MuLEstimate(mu=float(mu), L=best, sample_count=samples)


def estimate_constants(
    problem: FlexProblem,
    chance: ChanceParams,
    region: SearchRegion,
    true_model: ResponseModel,
    ms_model: Optional[ResponseModel],
    rng: np.random.Generator,
    pairs: int = DEFAULT_PAIR_COUNT,
    points: int = DEFAULT_ESTIMATOR_POINTS,
    samples: int = DEFAULT_ESTIMATOR_SAMPLES,
    overrides: Optional[dict] = None,
    noise_rng: Optional[np.random.Generator] = None,
) -> ConstantsReport:
    """
    Assemble a ConstantsReport from the estimators.

    eps is the largest single partial slope of the true model shift; B is zero
    without a misspecified model. Entries in overrides replace the estimates.
    sigma draws its response noise from noise_rng when given, from rng otherwise.
    """
    overrides = overrides or {}
    sources = {}
    values = {}

    if "mu" not in overrides or "L" not in overrides:
        mu_l = estimate_mu_L(problem, chance, region, pairs, rng)
        values["mu"], values["L"] = mu_l.mu, mu_l.L
        sources["mu"] = "analytic"
        sources["L"] = f"sampled ({mu_l.sample_count} pairs)"

    if "eps" not in overrides:
        lipschitz = estimate_lipschitz_eps(true_model, region.y_box, pairs, rng)
        values["eps"] = lipschitz.value
        sources["eps"] = "slope bound (largest partial)"

    if "sigma" not in overrides:
        def phi_gradients(p, Z):
            return grad_phi_batch(problem, chance, SaddlePoint.from_stacked(p, problem.n), Z)
        sigma = estimate_sigma(true_model, phi_gradients, region, samples, rng if noise_rng is None else noise_rng, points)
        values["sigma"] = sigma.sigma
        sources["sigma"] = f"sampled ({points} points x {samples})"

    if "B" not in overrides:
        if ms_model is None:
            values["B"] = 0.0
            sources["B"] = "well-specified"
        else:
            mis = estimate_misspecification_bound(true_model, ms_model, region.y_box, samples, rng, points)
            values["B"] = mis.value
            sources["B"] = "coupling"

    for name in ("mu", "L", "eps", "sigma", "B"):
        values.setdefault(name, 0.0)
    report = ConstantsReport(sources=sources, **values).with_overrides(overrides)
    if not report.valid:
        logger.warning(
            "Convergence constants invalid: eps*L/mu = %.3f (needs < 1), eps = %.3f",
            report.eps * report.L / report.mu if report.mu > 0 else math.inf, report.eps,
        )
    return report
