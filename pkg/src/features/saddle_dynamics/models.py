"""Data models for the primal-dual saddle dynamics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional

import numpy as np

from features.problem_core.models import Decision, DecisionBox, FlexProblem
from shared.constants import DEFAULT_BETA_MAX, DEFAULT_LAMBDA_MAX, DEFAULT_X_MARGIN
from shared.utils import DimensionError, DomainError, as_vector


@dataclass(frozen=True)
class ChanceParams:
    """Chernoff temperature u, risk level delta and dual regularization nu."""

    u: float
    delta: float
    nu: float

    def __post_init__(self):
        if self.u <= 0:
            raise DomainError("u must be positive")
        if not 0 < self.delta <= 1:
            raise DomainError("delta must lie in (0, 1]")
        if self.nu < 0:
            raise DomainError("nu must be nonnegative")


@dataclass(frozen=True)
class SaddlePoint:
    """p = (y, lambda)."""

    y: Decision
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", as_vector(self.lam, "lambda"))
        if np.any(self.lam < 0):
            raise DomainError("multipliers must be nonnegative")

    @property
    def n(self) -> int:
        return self.y.n

    @property
    def m(self) -> int:
        return int(self.lam.shape[0])

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.y.stacked(), self.lam])

    @classmethod
    def from_stacked(cls, p: np.ndarray, n: int) -> "SaddlePoint":
        p = np.asarray(p, dtype=float)
        if p.ndim != 1 or p.shape[0] < 2 * n:
            raise DimensionError("stacked saddle point is too short")
        return cls(y=Decision.from_stacked(p[:2 * n]), lam=np.maximum(p[2 * n:], 0.0))

    def distance(self, other: "SaddlePoint") -> float:
        return float(np.linalg.norm(self.stacked() - other.stacked()))


@dataclass(frozen=True)
class SearchRegion:
    """The clipping sets: a box for y and [0, lambda_max]^m for the multipliers."""

    y_box: DecisionBox
    lambda_max: float
    m: int = 1

    def __post_init__(self):
        if self.lambda_max < 0:
            raise DomainError("lambda_max must be nonnegative")
        if self.m < 1:
            raise DimensionError("a search region needs at least one multiplier")

    @classmethod
    def around(
        cls,
        problem: FlexProblem,
        x_margin: float = DEFAULT_X_MARGIN,
        beta_max: float = DEFAULT_BETA_MAX,
        lambda_max: float = DEFAULT_LAMBDA_MAX,
    ) -> "SearchRegion":
        return cls(
            y_box=DecisionBox.around(problem.x_ref, x_margin, beta_max),
            lambda_max=lambda_max,
            m=problem.m,
        )

    @property
    def n(self) -> int:
        return self.y_box.n

    @property
    def dual_frozen(self) -> bool:
        """lambda_max == 0 pins every multiplier at zero (pure primal descent)."""
        return self.lambda_max == 0.0

    @property
    def lower(self) -> np.ndarray:
        return np.concatenate([self.y_box.lower, np.zeros(self.m)])

    @property
    def upper(self) -> np.ndarray:
        return np.concatenate([self.y_box.upper, np.full(self.m, self.lambda_max)])

    def project(self, point: SaddlePoint) -> SaddlePoint:
        return SaddlePoint(y=self.y_box.project(point.y), lam=np.clip(point.lam, 0.0, self.lambda_max))

    def project_stacked(self, p: np.ndarray) -> np.ndarray:
        return np.clip(p, self.lower, self.upper)

    def contains(self, point: SaddlePoint, tol: float = 0.0) -> bool:
        p = point.stacked()
        return bool(np.all(p >= self.lower - tol) and np.all(p <= self.upper + tol))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Uniform stacked points p, shape (count, 2n + m)."""
        return rng.uniform(self.lower, self.upper, size=(count, 2 * self.n + self.m))

    def origin(self, problem: FlexProblem) -> SaddlePoint:
        """Default start: x at x_ref, no flexibility, zero multipliers (projected)."""
        start = Decision(x=problem.x_ref.copy(), beta=np.zeros(problem.n))
        return SaddlePoint(y=self.y_box.project(start), lam=np.zeros(self.m))


class StepSizeRange(NamedTuple):
    """Open interval (low, high) of admissible step sizes; empty when no step contracts."""

    low: float
    high: float
    empty: bool


class ConvergenceBounds(NamedTuple):
    rho: float
    ball_stochastic: float
    ball_model: float
    valid: bool


class MuLEstimate(NamedTuple):
    mu: float
    L: float
    sample_count: int


@dataclass(frozen=True)
class ConstantsReport:
    """
    Estimated constants and the derived step-size and error-ball quantities.

    rho(eta) = sqrt(1 - 2 eta mu + eta^2 L^2) + eta eps L
    ball_stochastic(eta) = eta sigma / (1 - rho), ball_model(eta) = sqrt(2) eta L B / (1 - rho)
    """

    mu: float
    L: float
    eps: float
    sigma: float = 0.0
    B: float = 0.0
    sources: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("mu", "L", "eps", "sigma", "B"):
            value = getattr(self, name)
            if value < 0 or math.isnan(value):
                raise DomainError(f"{name} must be nonnegative")

    @property
    def valid(self) -> bool:
        return self.mu > 0 and self.L > 0 and self.eps * self.L < self.mu and self.eps < 1

    @property
    def eta_max(self) -> float:
        if not self.valid:
            return 0.0
        return 2.0 * (self.mu - self.eps * self.L) / (self.L ** 2 * (1.0 - self.eps ** 2))

    def rho(self, eta: float) -> float:
        radicand = 1.0 - 2.0 * eta * self.mu + (eta * self.L) ** 2
        return math.sqrt(max(radicand, 0.0)) + eta * self.eps * self.L

    def ball_stochastic(self, eta: float) -> float:
        rho = self.rho(eta)
        if rho >= 1.0:
            return math.inf
        return eta * self.sigma / (1.0 - rho)

    def ball_model(self, eta: float) -> float:
        rho = self.rho(eta)
        if rho >= 1.0:
            return math.inf
        return math.sqrt(2.0) * eta * self.L * self.B / (1.0 - rho)

    def void_reason(self, eta: Optional[float] = None) -> Optional[str]:
        """Why the step-size range or the error balls are void; None when they hold."""
        if self.mu <= 0 or self.L <= 0:
            return "mu and L must be positive: no step-size range, error balls void"
        if not self.valid:
            return (
                f"eps*L/mu = {self.eps * self.L / self.mu:.3f} and eps = {self.eps:.3f} "
                "(need eps*L/mu < 1 and eps < 1): step-size range empty, error balls void"
            )
        if eta is not None and self.rho(eta) >= 1.0:
            return f"rho = {self.rho(eta):.4f} >= 1 at eta = {eta:g} (eta_max = {self.eta_max:.4g}): error balls void"
        return None

    def with_overrides(self, overrides: dict) -> "ConstantsReport":
        values = {name: getattr(self, name) for name in ("mu", "L", "eps", "sigma", "B")}
        sources = dict(self.sources)
        for name, value in overrides.items():
            values[name] = float(value)
            sources[name] = "scenario"
        return ConstantsReport(sources=sources, **values)

    def to_dict(self, eta: Optional[float] = None) -> dict:
        payload = {
            "mu": self.mu,
            "L": self.L,
            "eps": self.eps,
            "sigma": self.sigma,
            "B": self.B,
            "eps_L_over_mu": self.eps * self.L / self.mu if self.mu > 0 else math.inf,
            "valid": self.valid,
            "eta_max": self.eta_max,
            "sources": dict(self.sources),
        }
        if eta is not None:
            payload.update({
                "eta": eta,
                "rho": self.rho(eta),
                "ball_stochastic": self.ball_stochastic(eta),
                "ball_model": self.ball_model(eta),
            })
        note = self.void_reason(eta)
        if note:
            payload["note"] = note
        return payload


@dataclass(frozen=True)
class TraceRecord:
    k: int
    y: Decision
    lam: np.ndarray
    objective: float
    dist_to_ref: Optional[float] = None
    saddle_dist: Optional[float] = None
    cv_estimate: Optional[float] = None


@dataclass
class IterateTrace:
    """Per-iteration records of one primal-dual run; record 0 is the start."""

    records: List[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if self.records and record.k <= self.records[-1].k:
            raise DomainError("trace iterations must be strictly increasing")
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def final_point(self) -> SaddlePoint:
        return SaddlePoint(y=self.final.y, lam=self.final.lam)

    def decisions(self, window: Optional[int] = None) -> List[Decision]:
        chosen = self.records if window is None else self.records[-window:]
        return [record.y for record in chosen]

    def column(self, name: str) -> np.ndarray:
        """One scalar field per record as floats (None becomes NaN)."""
        values = [getattr(record, name) for record in self.records]
        return np.array([np.nan if value is None else value for value in values], dtype=float)
