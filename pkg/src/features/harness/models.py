"""Experiment report models."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

COMMANDS = ("robust", "bpd", "mspd", "flexo", "reference", "bounds", "check")


@dataclass
class AlgorithmRow:
    """One solution line of the report (a row of the solutions table)."""

    label: str
    x: List[float]
    beta: List[float]
    objective: float
    cv: Optional[float] = None
    feasible: Optional[bool] = None
    converged: Optional[bool] = None
    details: dict = field(default_factory=dict)

    @classmethod
    def from_arrays(cls, label: str, x: np.ndarray, beta: np.ndarray, objective: float, **kwargs) -> "AlgorithmRow":
        return cls(
            label=label,
            x=[float(v) for v in x],
            beta=[float(v) for v in beta],
            objective=float(objective),
            **kwargs,
        )

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "x": list(self.x),
            "beta": list(self.beta),
            "objective": self.objective,
            "cv": self.cv,
            "feasible": self.feasible,
            "converged": self.converged,
            "details": self.details,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "AlgorithmRow":
        return cls(**payload)


@dataclass
class ExperimentReport:
    """Result of one harness command; trace tables are written by the orchestrator."""

    scenario: str
    command: str
    rows: List[AlgorithmRow] = field(default_factory=list)
    bounds: Optional[dict] = None
    check: Optional[dict] = None
    traces: Dict[str, str] = field(default_factory=dict)
    trace_tables: Dict[str, Dict[str, np.ndarray]] = field(default_factory=dict, repr=False)

    @property
    def converged(self) -> bool:
        return all(row.converged is not False for row in self.rows)

    @property
    def feasible(self) -> bool:
        if self.check is not None:
            return bool(self.check["feasible"])
        return all(row.feasible is not False for row in self.rows)

    def to_dict(self) -> dict:
        """Machine-readable payload (trace tables excluded; their files are listed)."""
        return {
            "scenario": self.scenario,
            "command": self.command,
            "rows": [row.to_dict() for row in self.rows],
            "bounds": self.bounds,
            "check": self.check,
            "traces": dict(self.traces),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ExperimentReport":
        return cls(
            scenario=payload["scenario"],
            command=payload["command"],
            rows=[AlgorithmRow.from_dict(row) for row in payload["rows"]],
            bounds=payload["bounds"],
            check=payload["check"],
            traces=dict(payload["traces"]),
        )
