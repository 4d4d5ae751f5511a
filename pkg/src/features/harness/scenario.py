"""Scenario objects built from normalized scenario documents."""
from __future__ import annotations

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from features.flexo_pipeline.models import PipelineConfig
from features.problem_core.corridor import build_corridor
from features.problem_core.models import Decision, FlexProblem
from features.response_models.models import ResponseModel
from features.robust_solver.models import SolverSettings
from features.saddle_dynamics.models import ChanceParams, SearchRegion
from shared.config import ScenarioManager, normalize_scenario
from shared.config_defaults import build_default_scenario
from shared.constants import OFFICE_CORRIDOR_SCENARIO

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Scenario:
    """Everything one experiment needs; fully determined by its document."""

    name: str
    problem: FlexProblem
    chance: ChanceParams
    region: SearchRegion
    true_model: ResponseModel
    ms_model: ResponseModel
    algorithm: dict
    solver: SolverSettings
    oracle_cap: int
    estimators: dict
    constants: dict
    seeds: Dict[str, int]
    check: Optional[Decision]
    output_dir: Path
    document: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_document(cls, document: dict) -> "Scenario":
        """Build from a raw or normalized document; missing data arrays come from the seed streams."""
        doc = normalize_scenario(document)
        spec = doc["problem"]
        seeds = doc["seeds"]
        n = spec["n"]

        weights = spec["weights"]
        if weights is None:
            low, high = spec["weight_range"]
            weights = np.random.default_rng(seeds["weights"]).uniform(low, high, size=n)
        x_ref = spec["x_ref"]
        if x_ref is None:
            x_ref = np.random.default_rng(seeds["x_ref"]).normal(spec["x_ref_mean"], spec["x_ref_std"], size=n)
        gamma = spec["gamma"] if spec["gamma"] is not None else 2.0 * n
        if spec["D"] is not None:
            D, e = np.array(spec["D"], dtype=float), np.array(spec["e"], dtype=float)
        else:
            D = build_corridor(n, two_sided=spec["corridor"] == "two-sided")
            e = np.ones(D.shape[0])

        problem = FlexProblem(
            epsilon_x=spec["epsilon_x"],
            epsilon_beta=spec["epsilon_beta"],
            weights=weights,
            x_ref=x_ref,
            gamma=gamma,
            D=D,
            e=e,
        )
        region_spec = doc["region"]
        check = doc["check"]
        solver_spec = doc["solver"]
        return cls(
            name=doc["name"],
            problem=problem,
            chance=ChanceParams(**doc["chance"]),
            region=SearchRegion.around(
                problem, region_spec["x_margin"], region_spec["beta_max"], region_spec["lambda_max"]
            ),
            true_model=ResponseModel.from_dict(doc["models"]["true"]),
            ms_model=ResponseModel.from_dict(doc["models"]["misspecified"]),
            algorithm=dict(doc["algorithm"]),
            solver=SolverSettings.from_dict(solver_spec),
            oracle_cap=solver_spec["oracle_cap"],
            estimators=dict(doc["estimators"]),
            constants=dict(doc["constants"]),
            seeds=dict(seeds),
            check=Decision(x=check["x"], beta=check["beta"]) if check else None,
            output_dir=Path(doc["output"]["dir"]),
            document=doc,
        )

    def generator(self, stream: str, index: Optional[int] = None) -> np.random.Generator:
        """Generator for a named stream; index selects an independent child (one per realization)."""
        sequence = np.random.SeedSequence(self.seeds[stream])
        if index is None:
            return np.random.default_rng(sequence)
        return np.random.default_rng(np.random.SeedSequence(self.seeds[stream], spawn_key=(index,)))

    def pipeline_config(self, T: Optional[int] = None) -> PipelineConfig:
        algorithm = self.algorithm
        return PipelineConfig(
            eta=algorithm["eta"],
            chance=self.chance,
            region=self.region,
            model_ms=self.ms_model,
            T=algorithm["T"] if T is None else T,
            guard=algorithm["guard"],
            round=algorithm["round"],
            resolution=algorithm["resolution"],
            solver=self.solver,
            nodes=algorithm["quadrature_nodes"],
            oracle_cap=self.oracle_cap,
        )


def generate_example_document(seed: int) -> dict:
    """Office-corridor document: n=7, one-sided corridor, gamma=2n, e=1; data drawn from the seed."""
    document = build_default_scenario(name=f"office-example-{seed}")
    document["seed"] = int(seed)
    return normalize_scenario(document)


def generate_example_scenario(seed: int) -> Scenario:
    return Scenario.from_document(generate_example_document(seed))


def load_scenario(path: Path) -> Scenario:
    manager = ScenarioManager(path=Path(path))
    return Scenario.from_document(manager.load())


def office_corridor_scenario() -> Scenario:
    """The frozen office-corridor scenario shipped with the project."""
    return load_scenario(OFFICE_CORRIDOR_SCENARIO)


def materialized_document(scenario: Scenario) -> dict:
    """The scenario document with the generated weights and x_ref written out."""
    document = copy.deepcopy(scenario.document)
    document["problem"]["weights"] = [float(v) for v in scenario.problem.weights]
    document["problem"]["x_ref"] = [float(v) for v in scenario.problem.x_ref]
    return document
