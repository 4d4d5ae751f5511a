"""Data models for the robust (worst-case) reformulation."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from features.problem_core.models import Decision, FlexProblem
from features.problem_core.service import objective_gradient, eval_objective
from shared.constants import (
    DEFAULT_INNER_MAX_ITERS,
    DEFAULT_KKT_TOLERANCE,
    DEFAULT_MAX_ITERS,
    DEFAULT_MAX_OUTER,
    DEFAULT_MULTIPLIER_CAP,
    DEFAULT_PENALTY_GROWTH,
    DEFAULT_PENALTY_INIT,
    DEFAULT_PENALTY_MAX,
    POLISH_BISECTIONS,
)
from shared.utils import DimensionError


@dataclass(frozen=True)
class SolverSettings:
    """Tolerances and budgets of the multiplier method."""

    tol: float = DEFAULT_KKT_TOLERANCE
    max_iters: int = DEFAULT_MAX_ITERS
    max_outer: int = DEFAULT_MAX_OUTER
    inner_max_iters: int = DEFAULT_INNER_MAX_ITERS
    penalty_init: float = DEFAULT_PENALTY_INIT
    penalty_growth: float = DEFAULT_PENALTY_GROWTH
    penalty_max: float = DEFAULT_PENALTY_MAX
    multiplier_cap: float = DEFAULT_MULTIPLIER_CAP
    polish_bisections: int = POLISH_BISECTIONS

    @classmethod
    def from_dict(cls, raw: dict) -> "SolverSettings":
        return cls(
            tol=float(raw.get("tol", DEFAULT_KKT_TOLERANCE)),
            max_iters=int(raw.get("max_iters", DEFAULT_MAX_ITERS)),
            max_outer=int(raw.get("max_outer", DEFAULT_MAX_OUTER)),
            inner_max_iters=int(raw.get("inner_max_iters", DEFAULT_INNER_MAX_ITERS)),
            penalty_init=float(raw.get("penalty_init", DEFAULT_PENALTY_INIT)),
            penalty_growth=float(raw.get("penalty_growth", DEFAULT_PENALTY_GROWTH)),
            penalty_max=float(raw.get("penalty_max", DEFAULT_PENALTY_MAX)),
            multiplier_cap=float(raw.get("multiplier_cap", DEFAULT_MULTIPLIER_CAP)),
            polish_bisections=int(raw.get("polish_bisections", POLISH_BISECTIONS)),
        )


@dataclass(frozen=True)
class ReformulatedProgram:
    """
    Convex worst-case program over w = [x, beta, s, t].

    Inequalities g(w) <= 0, in order:
        sum s^2 - gamma                      (ball)
        beta_i + t_i - s_i                   (envelope, n rows)
        (x_i - x_ref_i) - t_i                (abs+, n rows)
        -(x_i - x_ref_i) - t_i               (abs-, n rows)
        D x - e + |D| beta                   (robust affine, c rows)
    beta, s, t carry lower bound 0. With a target y_T the objective becomes
    1/2 ||y - y_T||^2 (guarding projection); otherwise it is g(y).
    """

    problem: FlexProblem
    target: Optional[Decision] = None

    def __post_init__(self):
        if self.target is not None and self.target.n != self.problem.n:
            raise DimensionError("projection target has the wrong number of users")

    @property
    def n(self) -> int:
        return self.problem.n

    @property
    def n_decision_vars(self) -> int:
        return 3 * self.n

    @property
    def n_aux_vars(self) -> int:
        return self.n

    @property
    def n_vars(self) -> int:
        return 4 * self.n

    @property
    def n_constraints(self) -> int:
        return 1 + 3 * self.n + self.problem.c

    @property
    def constraint_labels(self) -> List[str]:
        labels = ["ball"]
        labels += [f"envelope[{i}]" for i in range(self.n)]
        labels += [f"abs+[{i}]" for i in range(self.n)]
        labels += [f"abs-[{i}]" for i in range(self.n)]
        labels += [f"affine[{j}]" for j in range(self.problem.c)]
        return labels

    @property
    def lower(self) -> np.ndarray:
        return np.concatenate([np.full(self.n, -np.inf), np.zeros(3 * self.n)])

    @property
    def upper(self) -> np.ndarray:
        return np.full(4 * self.n, np.inf)

    def bounds(self) -> List[Tuple[Optional[float], Optional[float]]]:
        return [(None, None)] * self.n + [(0.0, None)] * (3 * self.n)

    def split(self, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        n = self.n
        return w[:n], w[n:2 * n], w[2 * n:3 * n], w[3 * n:]

    def initial_point(self, start: Decision) -> np.ndarray:
        t = np.abs(start.x - self.problem.x_ref)
        return np.concatenate([start.x, start.beta, start.beta + t, t])

    def decision(self, w: np.ndarray) -> Decision:
        x, beta, _, _ = self.split(w)
        return Decision(x=x.copy(), beta=np.maximum(beta, 0.0))

    def objective(self, w: np.ndarray) -> Tuple[float, np.ndarray]:
        x, beta, _, _ = self.split(w)
        grad = np.zeros_like(w)
        if self.target is None:
            value = eval_objective(self.problem, Decision(x=x, beta=np.maximum(beta, 0.0)))
            grad[:self.n], grad[self.n:2 * self.n] = objective_gradient(self.problem, x, beta)
            return value, grad
        dx = x - self.target.x
        dbeta = beta - self.target.beta
        grad[:self.n], grad[self.n:2 * self.n] = dx, dbeta
        return 0.5 * float(dx @ dx + dbeta @ dbeta), grad

    def constraints(self, w: np.ndarray) -> np.ndarray:
        x, beta, s, t = self.split(w)
        offset = x - self.problem.x_ref
        D = self.problem.D
        return np.concatenate([
            [float(s @ s) - self.problem.gamma],
            beta + t - s,
            offset - t,
            -offset - t,
            D @ x - self.problem.e + np.abs(D) @ beta,
        ])

    def jacobian(self, w: np.ndarray) -> np.ndarray:
        n, c = self.n, self.problem.c
        _, _, s, _ = self.split(w)
        J = np.zeros((self.n_constraints, self.n_vars))
        index = np.arange(n)
        J[0, 2 * n:3 * n] = 2.0 * s
        rows = 1 + index
        J[rows, n + index] = 1.0
        J[rows, 3 * n + index] = 1.0
        J[rows, 2 * n + index] = -1.0
        rows = 1 + n + index
        J[rows, index] = 1.0
        J[rows, 3 * n + index] = -1.0
        rows = 1 + 2 * n + index
        J[rows, index] = -1.0
        J[rows, 3 * n + index] = -1.0
        if c:
            J[1 + 3 * n:, :n] = self.problem.D
            J[1 + 3 * n:, n:2 * n] = np.abs(self.problem.D)
        return J


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one robust solve or guarding projection."""

    decision: Decision
    objective_value: float
    kkt_residual: float
    iterations: int
    converged: bool
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    shrink_factor: float = 1.0
    outer_iterations: int = 0
    feasible: bool = True
