"""Robust solver feature exports."""
from features.robust_solver.models import ReformulatedProgram, SolveReport, SolverSettings
from features.robust_solver.service import (
    build_reformulation,
    guard_project,
    inner_round,
    kkt_residual,
    solve_reformulation,
)

__all__ = [
    "ReformulatedProgram",
    "SolveReport",
    "SolverSettings",
    "build_reformulation",
    "guard_project",
    "inner_round",
    "kkt_residual",
    "solve_reformulation",
]
