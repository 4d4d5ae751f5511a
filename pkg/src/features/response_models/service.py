"""Response model service - sampling, clamped laws and Chernoff expectations."""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import NamedTuple, Tuple

import numpy as np
from scipy.special import log_ndtr, logsumexp, ndtr

from features.problem_core.models import Decision, FlexProblem
from features.problem_core.service import constraint_values_batch
from features.response_models.models import ExpectationRequest, FactorizedLaw, ResponseModel
from shared.constants import CLAMP_HIGH, CLAMP_LOW, QUADRATURE_NODES
from shared.utils import DimensionError, DomainError

logger = logging.getLogger(__name__)

_HALF_LOG_2PI = 0.5 * np.log(2.0 * np.pi)


class ChernoffMoments(NamedTuple):
    """
    For every constraint j (rows, ball first):
        log_values[j]  = log E[exp(h_j(v) / u)]
        grad_v[j]      = E[exp(h_j(v) / u) * grad_v h_j(v)]
        grad_v_z[j]    = E[exp(h_j(v) / u) * grad_v h_j(v) * z]
    """

    log_values: np.ndarray
    grad_v: np.ndarray
    grad_v_z: np.ndarray


def _mean_shift(model: ResponseModel, decision: Decision) -> np.ndarray:
    return model.shift(decision.x, decision.beta) + model.noise_loc


def sample_responses(
    model: ResponseModel, decision: Decision, rng: np.random.Generator, count: int
) -> np.ndarray:
    """count independent responses, shape (count, n); deterministic models repeat the clamped shift."""
    center = _mean_shift(model, decision)
    if model.deterministic:
        return np.tile(np.clip(center, CLAMP_LOW, CLAMP_HIGH), (count, 1))
    noise = rng.standard_normal((count, decision.n))
    return np.clip(center + model.noise_scale * noise, CLAMP_LOW, CLAMP_HIGH)


def sample_response(model: ResponseModel, decision: Decision, rng: np.random.Generator) -> np.ndarray:
    """One response z in [-1, 1]^n at the announced decision."""
    if np.any(decision.beta < 0):
        raise DomainError("beta must be nonnegative")
    return sample_responses(model, decision, rng, 1)[0]


def coupled_responses(
    model: ResponseModel, decision: Decision, standard_noise: np.ndarray
) -> np.ndarray:
    """Responses driven by given standard-normal draws (common random numbers)."""
    center = _mean_shift(model, decision)
    return np.clip(center + model.noise_scale * standard_noise, CLAMP_LOW, CLAMP_HIGH)


def _log_std_normal_pdf(t: np.ndarray) -> np.ndarray:
    return -0.5 * t * t - _HALF_LOG_2PI


@lru_cache(maxsize=8)
def _legendre_rule(nodes: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(nodes)


def factorized_law(model: ResponseModel, decision: Decision, nodes: int = QUADRATURE_NODES) -> FactorizedLaw:
    """
    Per-coordinate law of the clamped response.

    The clamp puts atoms at -1 and +1 carrying the Gaussian tail masses; the
    interior density is integrated with a Gauss-Legendre rule whose weights are
    rescaled to the exact interior mass.
    """
    center = _mean_shift(model, decision)
    n = decision.n
    if model.deterministic:
        return FactorizedLaw(
            points=np.clip(center, CLAMP_LOW, CLAMP_HIGH)[:, None],
            log_weights=np.zeros((n, 1)),
        )

    scale = model.noise_scale
    lower_std = (CLAMP_LOW - center) / scale
    upper_std = (CLAMP_HIGH - center) / scale
    log_low = log_ndtr(lower_std)
    log_high = log_ndtr(-upper_std)

    t, omega = _legendre_rule(nodes)
    standardized = (t[None, :] - center[:, None]) / scale
    log_interior = np.log(omega)[None, :] + _log_std_normal_pdf(standardized) - np.log(scale)
    with np.errstate(divide="ignore"):
        log_mass = np.log(np.maximum(ndtr(upper_std) - ndtr(lower_std), 0.0))
    log_interior += (log_mass - logsumexp(log_interior, axis=1))[:, None]

    points = np.hstack([np.full((n, 1), CLAMP_LOW), np.full((n, 1), CLAMP_HIGH), np.tile(t, (n, 1))])
    log_weights = np.hstack([log_low[:, None], log_high[:, None], log_interior])
    return FactorizedLaw(points=points, log_weights=log_weights)


def mean_gradient_inputs(model: ResponseModel, decision: Decision, nodes: int = QUADRATURE_NODES) -> FactorizedLaw:
    """Distribution summary the model-based primal-dual step integrates against."""
    return factorized_law(model, decision, nodes)


def _tilt(log_weights: np.ndarray, exponent: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """log normalizer and tilted probabilities of exp(exponent) under the law."""
    shifted = log_weights + exponent
    log_normalizer = logsumexp(shifted, axis=1)
    return log_normalizer, np.exp(shifted - log_normalizer[:, None])


def chernoff_moments(problem: FlexProblem, law: FactorizedLaw, decision: Decision, u: float) -> ChernoffMoments:
    """Exact expectations of exp(h_j / u) and its v-gradients under a product law."""
    if u <= 0:
        raise DomainError("Chernoff temperature u must be positive")
    if law.n != problem.n or decision.n != problem.n:
        raise DimensionError("law, decision and problem disagree on the number of users")
    x, beta = decision.x, decision.beta
    z = law.points
    m = problem.m
    log_values = np.empty(m)
    grad_v = np.empty((m, problem.n))
    grad_v_z = np.empty((m, problem.n))

    # Ball: exp(h/u) = exp(-gamma/u) * prod_i exp(r_i^2 / u), r = x + beta z - x_ref
    r = (x - problem.x_ref)[:, None] + beta[:, None] * z
    log_normalizer, tilted = _tilt(law.log_weights, r * r / u)
    log_values[0] = -problem.gamma / u + float(np.sum(log_normalizer))
    scale = np.exp(log_values[0])
    grad_v[0] = 2.0 * scale * np.sum(tilted * r, axis=1)
    grad_v_z[0] = 2.0 * scale * np.sum(tilted * r * z, axis=1)

    # Affine rows: exp(h/u) = exp((d x - e)/u) * prod_i exp(d_i beta_i z_i / u)
    if problem.c:
        D = problem.D
        shifted = law.log_weights[None, :, :] + (D * beta)[:, :, None] * z[None, :, :] / u
        log_normalizer = logsumexp(shifted, axis=2)
        tilted_mean = np.sum(np.exp(shifted - log_normalizer[:, :, None]) * z[None, :, :], axis=2)
        log_values[1:] = (D @ x - problem.e) / u + log_normalizer.sum(axis=1)
        scale = np.exp(log_values[1:])[:, None]
        grad_v[1:] = scale * D
        grad_v_z[1:] = scale * D * tilted_mean

    return ChernoffMoments(log_values=log_values, grad_v=grad_v, grad_v_z=grad_v_z)


def expected_constraint_values(problem: FlexProblem, law: FactorizedLaw, decision: Decision) -> np.ndarray:
    """E[h_j(x + beta z)] for every j from the first two moments of the law."""
    mean = law.mean()
    second = law.second_moment()
    offset = decision.x - problem.x_ref
    beta = decision.beta
    ball = float(np.sum(offset ** 2 + 2.0 * offset * beta * mean + beta ** 2 * second)) - problem.gamma
    affine = problem.D @ (decision.x + beta * mean) - problem.e
    return np.concatenate([[ball], affine])


def sample_exp_constraint(
    model: ResponseModel, problem: FlexProblem, request: ExpectationRequest
) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of exp(h_j / u) from the request's seed."""
    rng = np.random.default_rng(request.seed)
    decision = request.decision
    z = sample_responses(model, decision, rng, request.samples)
    values = constraint_values_batch(problem, decision.x + decision.beta * z)[:, request.constraint]
    integrand = np.exp(values / request.u)
    error = float(np.std(integrand, ddof=1) / np.sqrt(request.samples)) if request.samples > 1 else 0.0
    return float(np.mean(integrand)), error


def expect_exp_constraint(model: ResponseModel, problem: FlexProblem, request: ExpectationRequest) -> float:
    """E_{z ~ D(y)}[exp(h_j(x + beta z) / u)] by the requested method."""
    if request.constraint >= problem.m:
        raise DomainError(f"constraint index {request.constraint} out of range for m={problem.m}")
    if request.method == "monte-carlo":
        value, _ = sample_exp_constraint(model, problem, request)
        return value
    law = factorized_law(model, request.decision, request.nodes)
    moments = chernoff_moments(problem, law, request.decision, request.u)
    return float(np.exp(moments.log_values[request.constraint]))
