"""Data models for the Flex-O pipeline."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from features.problem_core.models import Decision, RobustCertificate
from features.response_models.models import ResponseModel
from features.robust_solver.models import SolverSettings
from features.saddle_dynamics.models import ChanceParams, SearchRegion
from shared.constants import DEFAULT_RESOLUTION, DEFAULT_T, QUADRATURE_NODES, VERTEX_ORACLE_CAP
from shared.utils import DomainError

STAGES = ("robust", "mspd", "guard", "round")


@dataclass(frozen=True)
class PipelineConfig:
    """Settings of one Flex-O run."""

    eta: float
    chance: ChanceParams
    region: SearchRegion
    model_ms: ResponseModel
    T: int = DEFAULT_T
    guard: bool = True
    round: bool = False
    resolution: float = DEFAULT_RESOLUTION
    solver: SolverSettings = field(default_factory=SolverSettings)
    nodes: int = QUADRATURE_NODES
    oracle_cap: int = VERTEX_ORACLE_CAP

    def __post_init__(self):
        if self.T < 0:
            raise DomainError("T must be nonnegative")
        if self.round and self.resolution <= 0:
            raise DomainError("resolution must be positive when rounding")
        if self.eta <= 0:
            raise DomainError("eta must be positive")

    def with_T(self, T: int) -> "PipelineConfig":
        return PipelineConfig(
            eta=self.eta, chance=self.chance, region=self.region, model_ms=self.model_ms, T=T,
            guard=self.guard, round=self.round, resolution=self.resolution, solver=self.solver,
            nodes=self.nodes, oracle_cap=self.oracle_cap,
        )


@dataclass(frozen=True)
class UserInterval:
    """The set [x_i - beta_i, x_i + beta_i] offered to one user."""

    user: int
    center: float
    radius: float

    @property
    def lower(self) -> float:
        return self.center - self.radius

    @property
    def upper(self) -> float:
        return self.center + self.radius

    def to_dict(self) -> dict:
        return {
            "user": self.user,
            "center": self.center,
            "radius": self.radius,
            "lower": self.lower,
            "upper": self.upper,
        }


@dataclass
class FlexibleAssignment:
    """Final decision of a Flex-O run plus the decision after every stage that ran."""

    decision: Decision
    provenance: Dict[str, Decision] = field(default_factory=dict)
    cv_estimate: Optional[float] = None
    certificate: Optional[RobustCertificate] = None
    robust_converged: bool = True
    guard_converged: Optional[bool] = None

    @property
    def stages(self) -> List[str]:
        return [stage for stage in STAGES if stage in self.provenance]

    @property
    def intervals(self) -> List[UserInterval]:
        return [
            UserInterval(user=i, center=float(x), radius=float(beta))
            for i, (x, beta) in enumerate(zip(self.decision.x, self.decision.beta))
        ]
