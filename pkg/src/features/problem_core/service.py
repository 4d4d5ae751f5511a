"""Problem core service - realization, cost, constraints and worst-case envelopes."""
from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from features.problem_core.models import ConstraintValues, Decision, FlexProblem, RobustCertificate
from shared.constants import ORACLE_TOLERANCE, VERTEX_CHUNK, VERTEX_ORACLE_CAP
from shared.utils import DimensionError, DomainError, OracleCapExceededError

logger = logging.getLogger(__name__)

# Slack for |z_i| <= 1 when z comes out of floating-point arithmetic
_Z_SLACK = 1e-12


def _check_size(problem: FlexProblem, decision: Decision) -> None:
    if decision.n != problem.n:
        raise DimensionError(f"decision has {decision.n} users, problem has {problem.n}")


def realize(decision: Decision, z) -> np.ndarray:
    """Return v = x + beta * z for one response z in [-1, 1]^n."""
    z = np.asarray(z, dtype=float)
    if z.shape != (decision.n,):
        raise DimensionError(f"z has shape {z.shape}, expected ({decision.n},)")
    if np.any(np.abs(z) > 1.0 + _Z_SLACK):
        raise DomainError("z must lie in [-1, 1]^n")
    return decision.x + decision.beta * z


def eval_objective(problem: FlexProblem, decision: Decision) -> float:
    """g(y) = (eps_x/2)||x||^2 + sum_i w_i(-beta_i + (eps_beta/2) beta_i^2)."""
    _check_size(problem, decision)
    x, beta = decision.x, decision.beta
    nominal = 0.5 * problem.epsilon_x * float(x @ x)
    flexibility = float(problem.weights @ (-beta + 0.5 * problem.epsilon_beta * beta * beta))
    return nominal + flexibility


def objective_gradient(problem: FlexProblem, x: np.ndarray, beta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gradient of g with respect to (x, beta)."""
    return problem.epsilon_x * x, problem.weights * (problem.epsilon_beta * beta - 1.0)


def constraint_values_batch(problem: FlexProblem, V: np.ndarray) -> np.ndarray:
    """Constraint entries for a batch of realized points, shape (K, m)."""
    V = np.atleast_2d(np.asarray(V, dtype=float))
    if V.shape[1] != problem.n:
        raise DimensionError(f"points have {V.shape[1]} coordinates, expected {problem.n}")
    deviation = V - problem.x_ref
    ball = np.einsum("ki,ki->k", deviation, deviation) - problem.gamma
    affine = V @ problem.D.T - problem.e
    return np.column_stack([ball, affine])


def eval_constraints(problem: FlexProblem, v) -> ConstraintValues:
    """Entry 0 is ||v - x_ref||^2 - gamma; entries 1..c are d_j v - e_j."""
    v = np.asarray(v, dtype=float)
    if v.shape != (problem.n,):
        raise DimensionError(f"v has shape {v.shape}, expected ({problem.n},)")
    return ConstraintValues(values=constraint_values_batch(problem, v[None, :])[0])


def worst_case_affine_margin(d_row, e_val: float, decision: Decision) -> float:
    """max over z in [-1,1]^n of d (x + beta z) - e, i.e. d x - e + sum |d_i| beta_i."""
    d_row = np.asarray(d_row, dtype=float)
    if d_row.shape != (decision.n,):
        raise DimensionError(f"row has shape {d_row.shape}, expected ({decision.n},)")
    return float(d_row @ decision.x - e_val + np.abs(d_row) @ decision.beta)


def worst_case_norm_envelope(decision: Decision, x_ref) -> np.ndarray:
    """s_i = beta_i + |x_i - x_ref_i|; ||s||^2 is the worst ||v - x_ref||^2 over the box."""
    x_ref = np.asarray(x_ref, dtype=float)
    if x_ref.shape != (decision.n,):
        raise DimensionError(f"x_ref has shape {x_ref.shape}, expected ({decision.n},)")
    return decision.beta + np.abs(decision.x - x_ref)


def worst_case_constraints(problem: FlexProblem, decision: Decision) -> np.ndarray:
    """Closed-form worst case of every constraint entry over the hyperbox."""
    _check_size(problem, decision)
    envelope = worst_case_norm_envelope(decision, problem.x_ref)
    ball = float(envelope @ envelope) - problem.gamma
    affine = problem.D @ decision.x - problem.e + np.abs(problem.D) @ decision.beta
    return np.concatenate([[ball], affine])


def robust_margin(problem: FlexProblem, decision: Decision) -> float:
    return float(np.max(worst_case_constraints(problem, decision)))


def _sign_patterns(start: int, stop: int, n: int) -> np.ndarray:
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n, dtype=np.int64)) & 1
    return 2.0 * bits - 1.0


def vertex_feasibility_oracle(
    problem: FlexProblem,
    decision: Decision,
    tol: float = ORACLE_TOLERANCE,
    cap: int = VERTEX_ORACLE_CAP,
) -> RobustCertificate:
    """
    Enumerate all 2^n sign patterns and report the worst constraint value.

    Vertex k sets z_i = +1 when bit i of k is set, -1 otherwise.
    """
    _check_size(problem, decision)
    n = problem.n
    if n > cap:
        raise OracleCapExceededError(n, cap)

    best_margin = -np.inf
    best_code = 0
    best_constraint = 0
    total = 1 << n
    for start in range(0, total, VERTEX_CHUNK):
        stop = min(start + VERTEX_CHUNK, total)
        signs = _sign_patterns(start, stop, n)
        values = constraint_values_batch(problem, decision.x + decision.beta * signs)
        flat = int(np.argmax(values))
        row, column = divmod(flat, values.shape[1])
        if values[row, column] > best_margin:
            best_margin = float(values[row, column])
            best_code = start + row
            best_constraint = column

    vertex = tuple(int(s) for s in _sign_patterns(best_code, best_code + 1, n)[0])
    return RobustCertificate(
        feasible=bool(best_margin <= tol),
        worst_vertex=vertex,
        worst_margin=best_margin,
        worst_constraint=best_constraint,
        tolerance=tol,
    )
