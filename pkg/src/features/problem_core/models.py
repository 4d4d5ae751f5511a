"""Data models for the flexible resource problem."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from shared.utils import DomainError, DimensionError, as_matrix, as_vector


@dataclass(frozen=True)
class FlexProblem:
    """
    Shared convex resource problem with per-user flexibility.

    Cost g(y) = (eps_x/2)||x||^2 + sum_i w_i (-beta_i + (eps_beta/2) beta_i^2);
    constraints, in this fixed order: ||v - x_ref||^2 - gamma, then D v - e row by row.
    """

    epsilon_x: float
    epsilon_beta: float
    weights: np.ndarray
    x_ref: np.ndarray
    gamma: float
    D: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    e: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        weights = as_vector(self.weights, "weights")
        n = weights.shape[0]
        if n < 1:
            raise DimensionError("a problem needs at least one user")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "x_ref", as_vector(self.x_ref, "x_ref", n))
        matrix = as_matrix(self.D, "D", n)
        object.__setattr__(self, "D", matrix)
        object.__setattr__(self, "e", as_vector(self.e, "e", matrix.shape[0]))
        object.__setattr__(self, "epsilon_x", float(self.epsilon_x))
        object.__setattr__(self, "epsilon_beta", float(self.epsilon_beta))
        object.__setattr__(self, "gamma", float(self.gamma))

        if np.any(weights < 0):
            raise DomainError("weights must be nonnegative")
        if self.gamma <= 0:
            raise DomainError("gamma must be positive")
        if self.epsilon_x <= 0 or self.epsilon_beta <= 0:
            raise DomainError("epsilon_x and epsilon_beta must be positive")

    @property
    def n(self) -> int:
        return int(self.weights.shape[0])

    @property
    def c(self) -> int:
        return int(self.D.shape[0])

    @property
    def m(self) -> int:
        return 1 + self.c

    @property
    def strong_convexity(self) -> float:
        """Curvature floor of g: min(eps_x, min_i w_i eps_beta)."""
        return float(min(self.epsilon_x, float(np.min(self.weights)) * self.epsilon_beta))


@dataclass(frozen=True)
class Decision:
    """Nominal decisions x plus flexibility radii beta (y = (x, beta))."""

    x: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        x = as_vector(self.x, "x")
        beta = as_vector(self.beta, "beta", x.shape[0])
        if np.any(beta < 0):
            raise DomainError("beta must be nonnegative")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "beta", beta)

    @property
    def n(self) -> int:
        return int(self.x.shape[0])

    def stacked(self) -> np.ndarray:
        """y as one vector [x; beta]."""
        return np.concatenate([self.x, self.beta])

    @classmethod
    def from_stacked(cls, y: np.ndarray) -> "Decision":
        y = np.asarray(y, dtype=float)
        if y.ndim != 1 or y.shape[0] % 2:
            raise DimensionError("stacked decision must have even length 2n")
        half = y.shape[0] // 2
        return cls(x=y[:half].copy(), beta=np.maximum(y[half:], 0.0))

    def with_beta(self, beta: np.ndarray) -> "Decision":
        return Decision(x=self.x.copy(), beta=np.asarray(beta, dtype=float))

    def distance(self, other: "Decision") -> float:
        return float(np.linalg.norm(self.stacked() - other.stacked()))


@dataclass(frozen=True)
class ConstraintValues:
    """Constraint entries [ball; affine rows] at one realized point v."""

    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", as_vector(self.values, "values"))

    @property
    def ball(self) -> float:
        return float(self.values[0])

    @property
    def affine(self) -> np.ndarray:
        return self.values[1:]

    @property
    def worst(self) -> float:
        return float(np.max(self.values))

    def feasible(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values <= tol))


@dataclass(frozen=True)
class RobustCertificate:
    """Outcome of the vertex enumeration over the hyperbox [-1, 1]^n."""

    feasible: bool
    worst_vertex: Tuple[int, ...]
    worst_margin: float
    worst_constraint: int
    tolerance: float

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "worst_vertex": list(self.worst_vertex),
            "worst_margin": self.worst_margin,
            "worst_constraint": self.worst_constraint,
            "tolerance": self.tolerance,
        }


@dataclass(frozen=True)
class DecisionBox:
    """Per-coordinate bounds for (x, beta); the y part of a search region."""

    x_lower: np.ndarray
    x_upper: np.ndarray
    beta_lower: np.ndarray
    beta_upper: np.ndarray

    def __post_init__(self):
        x_lower = as_vector(self.x_lower, "x_lower")
        n = x_lower.shape[0]
        object.__setattr__(self, "x_lower", x_lower)
        object.__setattr__(self, "x_upper", as_vector(self.x_upper, "x_upper", n))
        object.__setattr__(self, "beta_lower", as_vector(self.beta_lower, "beta_lower", n))
        object.__setattr__(self, "beta_upper", as_vector(self.beta_upper, "beta_upper", n))
        if np.any(self.x_lower > self.x_upper) or np.any(self.beta_lower > self.beta_upper):
            raise DomainError("decision box is empty")
        if np.any(self.beta_lower < 0):
            raise DomainError("beta lower bound must be nonnegative")

    @classmethod
    def around(cls, x_ref: np.ndarray, x_margin: float, beta_max: float) -> "DecisionBox":
        x_ref = np.asarray(x_ref, dtype=float)
        n = x_ref.shape[0]
        return cls(
            x_lower=x_ref - x_margin,
            x_upper=x_ref + x_margin,
            beta_lower=np.zeros(n),
            beta_upper=np.full(n, float(beta_max)),
        )

    @property
    def n(self) -> int:
        return int(self.x_lower.shape[0])

    @property
    def lower(self) -> np.ndarray:
        return np.concatenate([self.x_lower, self.beta_lower])

    @property
    def upper(self) -> np.ndarray:
        return np.concatenate([self.x_upper, self.beta_upper])

    def project(self, decision: Decision) -> Decision:
        return Decision(
            x=np.clip(decision.x, self.x_lower, self.x_upper),
            beta=np.clip(decision.beta, self.beta_lower, self.beta_upper),
        )

    def contains(self, decision: Decision, tol: float = 0.0) -> bool:
        y = decision.stacked()
        return bool(np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform draws of stacked y, shape (count, 2n)."""
        return rng.uniform(self.lower, self.upper, size=(count, 2 * self.n))

    def center(self) -> Decision:
        return Decision(
            x=0.5 * (self.x_lower + self.x_upper),
            beta=0.5 * (self.beta_lower + self.beta_upper),
        )
