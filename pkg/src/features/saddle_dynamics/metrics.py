"""Constraint-violation and chance-constraint metrics under the true response law."""
from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from features.problem_core.models import Decision, FlexProblem
from features.problem_core.service import constraint_values_batch
from features.response_models.models import ResponseModel
from features.response_models.service import (
    chernoff_moments,
    expected_constraint_values,
    factorized_law,
    sample_responses,
)
from features.saddle_dynamics.models import ChanceParams
from shared.constants import CV_SAMPLES, CV_WINDOW, QUADRATURE_NODES
from shared.utils import DomainError

CV_METHODS = ("monte-carlo", "exact")


class ChanceViolation(NamedTuple):
    """Empirical P[h_j > 0] per constraint with its standard error."""

    probability: np.ndarray
    standard_error: np.ndarray


def _worst_expected_sampled(problem: FlexProblem, decision: Decision, model: ResponseModel,
                            samples: int, rng: np.random.Generator) -> float:
    z = sample_responses(model, decision, rng, samples)
    values = constraint_values_batch(problem, decision.x + decision.beta * z)
    return float(np.max(values.mean(axis=0)))


def constraint_violation_metric(
    problem: FlexProblem,
    decisions: Sequence[Decision],
    model: ResponseModel,
    samples: int = CV_SAMPLES,
    rng: Optional[np.random.Generator] = None,
    method: str = "monte-carlo",
    window: int = CV_WINDOW,
    nodes: int = QUADRATURE_NODES,
) -> float:
    """
    <CV(z)>: average over the last `window` decisions of max_j E[h_j(x + beta z)].

    Deterministic models and beta = 0 are evaluated exactly without sampling;
    method="exact" integrates the clamped law through its first two moments.
    """
    if window < 1:
        raise DomainError("window must be at least 1")
    if method not in CV_METHODS:
        raise DomainError(f"unknown CV method: {method}")
    chosen = list(decisions)[-window:]
    if not chosen:
        raise DomainError("at least one decision is required")
    if rng is None:
        rng = np.random.default_rng(0)

    worst = []
    for decision in chosen:
        if method == "exact" or model.deterministic or not np.any(decision.beta):
            law = factorized_law(model, decision, nodes)
            worst.append(float(np.max(expected_constraint_values(problem, law, decision))))
        else:
            worst.append(_worst_expected_sampled(problem, decision, model, samples, rng))
    return float(np.mean(worst))


def chernoff_terms(
    problem: FlexProblem,
    chance: ChanceParams,
    decision: Decision,
    model: ResponseModel,
    nodes: int = QUADRATURE_NODES,
) -> np.ndarray:
    """E[exp(h_j / u)] - delta for every constraint; all <= 0 certifies P[h_j > 0] <= delta."""
    law = factorized_law(model, decision, nodes)
    moments = chernoff_moments(problem, law, decision, chance.u)
    return np.exp(moments.log_values) - chance.delta


def chance_violation_probability(
    problem: FlexProblem,
    decision: Decision,
    model: ResponseModel,
    samples: int,
    rng: np.random.Generator,
) -> ChanceViolation:
    """Monte Carlo estimate of P[h_j(x + beta z) > 0] for every j."""
    if samples < 1:
        raise DomainError("samples must be at least 1")
    z = sample_responses(model, decision, rng, samples)
    violated = constraint_values_batch(problem, decision.x + decision.beta * z) > 0.0
    probability = violated.mean(axis=0)
    error = np.sqrt(probability * (1.0 - probability) / samples)
    return ChanceViolation(probability=probability, standard_error=error)
