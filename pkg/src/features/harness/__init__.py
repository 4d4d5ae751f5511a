"""Harness feature exports."""
from features.harness.models import COMMANDS, AlgorithmRow, ExperimentReport
from features.harness.parallel_executor import resolve_workers, run_realizations
from features.harness.reports import (
    format_solution_report,
    read_solution_report,
    read_trace_csv,
    write_experiment_outputs,
    write_solution_report,
    write_trace_csv,
)
from features.harness.scenario import (
    Scenario,
    generate_example_document,
    generate_example_scenario,
    load_scenario,
    materialized_document,
    office_corridor_scenario,
)
from features.harness.service import compute_reference, flexo_T_values, run_experiment

__all__ = [
    "COMMANDS",
    "AlgorithmRow",
    "ExperimentReport",
    "Scenario",
    "compute_reference",
    "flexo_T_values",
    "format_solution_report",
    "generate_example_document",
    "generate_example_scenario",
    "load_scenario",
    "materialized_document",
    "office_corridor_scenario",
    "read_solution_report",
    "read_trace_csv",
    "resolve_workers",
    "run_experiment",
    "run_realizations",
    "write_experiment_outputs",
    "write_solution_report",
    "write_trace_csv",
]
