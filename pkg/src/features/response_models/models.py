"""Data models for decision-dependent user responses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from features.problem_core.models import Decision
from shared.constants import (
    CV_SAMPLES,
    MISSPECIFIED_PIVOT,
    QUADRATURE_NODES,
    TRUE_MODEL_LOWER,
    TRUE_MODEL_UPPER,
)
from shared.utils import DomainError

MODEL_KINDS = ("true-piecewise", "misspecified-linear", "custom-additive")
EXPECTATION_METHODS = ("monte-carlo", "factorized-quadrature")


@dataclass(frozen=True)
class NoiseSpec:
    """Additive per-user noise xi ~ family(loc, scale), drawn independently per user."""

    family: str = "normal"
    loc: float = 0.0
    scale: float = 0.0

    def __post_init__(self):
        if self.family != "normal":
            raise DomainError(f"unsupported noise family: {self.family}")
        if self.scale < 0:
            raise DomainError("noise scale must be nonnegative")

    @property
    def deterministic(self) -> bool:
        return self.scale == 0.0

    def to_dict(self) -> dict:
        return {"family": self.family, "loc": self.loc, "scale": self.scale}


@dataclass(frozen=True)
class ResponseModel:
    """
    Additive shift rule z_i = clamp(Psi_i(x_i, beta_i) + xi_i, -1, 1).

    Kinds:
        true-piecewise      Psi = beta (lower - x) below lower, beta (upper - x) above upper, 0 between
        misspecified-linear Psi = -beta (x - pivot)
        custom-additive     Psi = offset + x_slope (x - pivot) + beta_slope beta
    """

    kind: str
    lower: float = TRUE_MODEL_LOWER
    upper: float = TRUE_MODEL_UPPER
    pivot: float = MISSPECIFIED_PIVOT
    offset: float = 0.0
    x_slope: float = 0.0
    beta_slope: float = 0.0
    noise: Optional[NoiseSpec] = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DomainError(f"unknown response model kind: {self.kind}")
        if self.kind == "true-piecewise" and self.lower > self.upper:
            raise DomainError("dead zone lower bound exceeds upper bound")

    @classmethod
    def true_model(cls, noise_scale: float = 0.0) -> "ResponseModel":
        noise = NoiseSpec(scale=noise_scale) if noise_scale > 0 else None
        return cls(kind="true-piecewise", noise=noise)

    @classmethod
    def misspecified_model(cls) -> "ResponseModel":
        return cls(kind="misspecified-linear")

    @classmethod
    def from_dict(cls, spec: dict) -> "ResponseModel":
        """Build from a normalized scenario model spec."""
        noise = spec.get("noise")
        params = {key: float(value) for key, value in spec.items() if key not in ("kind", "noise")}
        return cls(
            kind=spec["kind"],
            noise=NoiseSpec(**noise) if noise else None,
            **params,
        )

    def to_dict(self) -> dict:
        keys = {
            "true-piecewise": ("lower", "upper"),
            "misspecified-linear": ("pivot",),
            "custom-additive": ("offset", "x_slope", "pivot", "beta_slope"),
        }[self.kind]
        spec = {"kind": self.kind}
        spec.update({key: getattr(self, key) for key in keys})
        spec["noise"] = self.noise.to_dict() if self.noise else None
        return spec

    @property
    def deterministic(self) -> bool:
        return self.noise is None or self.noise.deterministic

    @property
    def noise_loc(self) -> float:
        return self.noise.loc if self.noise else 0.0

    @property
    def noise_scale(self) -> float:
        return self.noise.scale if self.noise else 0.0

    def shift(self, x: np.ndarray, beta: np.ndarray) -> np.ndarray:
        """Psi evaluated elementwise; x and beta broadcast together."""
        x = np.asarray(x, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if self.kind == "true-piecewise":
            below = np.where(x < self.lower, self.lower - x, 0.0)
            above = np.where(x > self.upper, self.upper - x, 0.0)
            return beta * (below + above)
        if self.kind == "misspecified-linear":
            return -beta * (x - self.pivot)
        return self.offset + self.x_slope * (x - self.pivot) + self.beta_slope * beta


@dataclass(frozen=True)
class ExpectationRequest:
    """One Chernoff expectation E[exp(h_j(x + beta z) / u)]."""

    decision: Decision
    constraint: int
    u: float
    method: str = "factorized-quadrature"
    samples: int = CV_SAMPLES
    seed: int = 0
    nodes: int = QUADRATURE_NODES

    def __post_init__(self):
        if self.u <= 0:
            raise DomainError("Chernoff temperature u must be positive")
        if self.method not in EXPECTATION_METHODS:
            raise DomainError(f"unknown expectation method: {self.method}")
        if self.samples < 1:
            raise DomainError("monte-carlo needs at least one sample")
        if self.nodes < 2:
            raise DomainError("quadrature needs at least two nodes")
        if self.constraint < 0:
            raise DomainError("constraint index must be nonnegative")


@dataclass(frozen=True)
class FactorizedLaw:
    """
    Product law of z: coordinate i takes points[i, k] with probability exp(log_weights[i, k]).

    Noisy models carry the two clamp atoms plus Gauss-Legendre nodes on (-1, 1);
    deterministic models carry one point per coordinate.
    """

    points: np.ndarray
    log_weights: np.ndarray

    @property
    def n(self) -> int:
        return int(self.points.shape[0])

    @property
    def weights(self) -> np.ndarray:
        return np.exp(self.log_weights)

    @property
    def is_point_mass(self) -> bool:
        return self.points.shape[1] == 1

    def mean(self) -> np.ndarray:
        return np.sum(self.weights * self.points, axis=1)

    def second_moment(self) -> np.ndarray:
        return np.sum(self.weights * self.points ** 2, axis=1)


@dataclass(frozen=True)
class LipschitzEstimate:
    """Sampled lower estimate of eps plus the closed-form slope bounds."""

    sampled: float
    upper_bound: Optional[float]
    partial_bound: Optional[float]
    pair_count: int

    @property
    def value(self) -> float:
        """Largest single partial slope when known, then the Euclidean bound, then the sampled value."""
        if self.partial_bound is not None:
            return self.partial_bound
        return self.upper_bound if self.upper_bound is not None else self.sampled


@dataclass(frozen=True)
class SigmaEstimate:
    """sigma = sqrt(2) * max over sampled points of the larger per-block mean deviation."""

    sigma: float
    y_deviation: float
    lambda_deviation: float
    worst_point: np.ndarray = field(default_factory=lambda: np.zeros(0))
    points: int = 0
    samples: int = 0


@dataclass(frozen=True)
class MisspecificationEstimate:
    """Coupling upper bound on sup_y W1(D_ms(y), D(y)) and the support cap 2 sqrt(n)."""

    bound: float
    trivial_cap: float
    worst_point: Tuple[float, ...] = ()
    points: int = 0
    samples: int = 0

    @property
    def value(self) -> float:
        return min(self.bound, self.trivial_cap)
