"""Regularized Chernoff Lagrangian phi(y, lambda, z) and its gradients."""
from __future__ import annotations

from typing import Tuple

import numpy as np

from features.problem_core.models import FlexProblem
from features.problem_core.service import (
    constraint_values_batch,
    eval_constraints,
    eval_objective,
    objective_gradient,
    realize,
)
from features.response_models.models import FactorizedLaw
from features.response_models.service import chernoff_moments
from features.saddle_dynamics.models import ChanceParams, SaddlePoint
from shared.utils import DimensionError, DomainError

# Slack for |z_i| <= 1 when z comes out of floating-point arithmetic
_Z_SLACK = 1e-12


def _check(problem: FlexProblem, chance: ChanceParams, point: SaddlePoint) -> None:
    if chance.u <= 0:
        raise DomainError("u must be positive")
    if point.n != problem.n or point.m != problem.m:
        raise DimensionError(f"saddle point ({point.n}, {point.m}) does not match problem ({problem.n}, {problem.m})")


def phi_value(problem: FlexProblem, chance: ChanceParams, point: SaddlePoint, z) -> float:
    """g(y) + sum_j lambda_j (exp(h_j(x + beta z) / u) - delta) - (nu/2) ||lambda||^2."""
    _check(problem, chance, point)
    h = eval_constraints(problem, realize(point.y, z)).values
    lam = point.lam
    penalty = float(lam @ (np.exp(h / chance.u) - chance.delta))
    return eval_objective(problem, point.y) + penalty - 0.5 * chance.nu * float(lam @ lam)


def grad_phi_batch(
    problem: FlexProblem, chance: ChanceParams, point: SaddlePoint, Z: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-sample gradients for responses Z of shape (S, n): (S, 2n) in y and (S, m) in lambda."""
    _check(problem, chance, point)
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    if Z.shape[1] != problem.n:
        raise DimensionError(f"responses have {Z.shape[1]} coordinates, expected {problem.n}")
    if np.any(np.abs(Z) > 1.0 + _Z_SLACK):
        raise DomainError("z must lie in [-1, 1]^n")
    x, beta, lam = point.y.x, point.y.beta, point.lam
    V = x + beta * Z
    exp_h = np.exp(constraint_values_batch(problem, V) / chance.u)
    weights = exp_h * (lam / chance.u)
    grad_v = 2.0 * weights[:, :1] * (V - problem.x_ref) + weights[:, 1:] @ problem.D
    grad_x, grad_beta = objective_gradient(problem, x, beta)
    grad_y = np.hstack([grad_x + grad_v, grad_beta + grad_v * Z])
    grad_lambda = exp_h - chance.delta - chance.nu * lam
    return grad_y, grad_lambda


def grad_phi(
    problem: FlexProblem, chance: ChanceParams, point: SaddlePoint, z
) -> Tuple[np.ndarray, np.ndarray]:
    """(grad_y of length 2n, grad_lambda of length m) of phi at one response z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (problem.n,):
        raise DimensionError(f"z has shape {z.shape}, expected ({problem.n},)")
    grad_y, grad_lambda = grad_phi_batch(problem, chance, point, z[None, :])
    return grad_y[0], grad_lambda[0]


def mean_grad_phi(
    problem: FlexProblem, chance: ChanceParams, point: SaddlePoint, law: FactorizedLaw
) -> Tuple[np.ndarray, np.ndarray]:
    """E_z[grad phi] under a product law, exactly (no sampling)."""
    _check(problem, chance, point)
    x, beta, lam = point.y.x, point.y.beta, point.lam
    moments = chernoff_moments(problem, law, point.y, chance.u)
    scale = lam / chance.u
    grad_x, grad_beta = objective_gradient(problem, x, beta)
    grad_y = np.concatenate([grad_x + scale @ moments.grad_v, grad_beta + scale @ moments.grad_v_z])
    grad_lambda = np.exp(moments.log_values) - chance.delta - chance.nu * lam
    return grad_y, grad_lambda


def saddle_field(
    problem: FlexProblem, chance: ChanceParams, p: np.ndarray, z: np.ndarray
) -> np.ndarray:
    """psi(p; z) = [grad_y phi; -grad_lambda phi] at a stacked point p for a fixed response."""
    point = SaddlePoint.from_stacked(p, problem.n)
    grad_y, grad_lambda = grad_phi(problem, chance, point, z)
    return np.concatenate([grad_y, -grad_lambda])
