"""Trace CSV and solution report writers/readers."""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Dict, Sequence

import numpy as np

from features.harness.models import AlgorithmRow, ExperimentReport
from features.saddle_dynamics.models import IterateTrace
from shared.config_io import dump_json_text

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "dist_to_ref", "objective", "cv_estimate")
AGGREGATE_COLUMNS = ("dist_mean", "dist_sd")
MACHINE_MARKER = "--- machine-readable ---"

TraceTable = Dict[str, np.ndarray]


def trace_table(trace: IterateTrace) -> TraceTable:
    return {
        "iter": trace.column("k"),
        "dist_to_ref": trace.column("dist_to_ref"),
        "objective": trace.column("objective"),
        "cv_estimate": trace.column("cv_estimate"),
    }


def aggregate_tables(traces: Sequence[IterateTrace]) -> TraceTable:
    """Columns of the first realization plus mean and SD of dist_to_ref across all of them."""
    table = trace_table(traces[0])
    distances = np.vstack([trace.column("dist_to_ref") for trace in traces])
    table["dist_mean"] = distances.mean(axis=0)
    table["dist_sd"] = distances.std(axis=0, ddof=1) if len(traces) > 1 else np.zeros(distances.shape[1])
    return table


def _cell(column: str, value: float) -> str:
    if np.isnan(value):
        return ""
    if column == "iter":
        return str(int(value))
    return repr(float(value))


def write_trace_csv(table: TraceTable, path: Path) -> Path:
    """Header row plus one row per iteration; empty cells for missing values."""
    path = Path(path)
    columns = list(TRACE_COLUMNS)
    if "dist_mean" in table:
        columns += list(AGGREGATE_COLUMNS)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = len(table["iter"]) if "iter" in table else 0
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for index in range(rows):
            writer.writerow([_cell(column, float(table[column][index])) for column in columns])
    logger.info("Wrote trace %s (%d rows)", path, rows)
    return path


def read_trace_csv(path: Path) -> TraceTable:
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        values = [[float(cell) if cell else np.nan for cell in row] for row in reader]
    data = np.array(values, dtype=float).reshape(len(values), len(header))
    return {column: data[:, index] for index, column in enumerate(header)}


def _fixed(values, decimals: int) -> str:
    return " ".join(f"{value:.{decimals}f}" for value in values)


def _row_lines(row: AlgorithmRow) -> list:
    lines = [
        f"[{row.label}]",
        f"  x         : {_fixed(row.x, 1)}",
        f"  beta      : {_fixed(row.beta, 1)}",
        f"  <CV(z)>   : {'n/a' if row.cv is None else f'{row.cv:.3f}'}",
        f"  objective : {row.objective:.6f}",
    ]
    if row.feasible is not None:
        lines.append(f"  feasible  : {'yes' if row.feasible else 'NO'}")
    if row.converged is not None:
        lines.append(f"  converged : {'yes' if row.converged else 'NO'}")
    return lines


def format_solution_report(report: ExperimentReport) -> str:
    lines = [f"Flex-O report - scenario '{report.scenario}', command '{report.command}'", ""]
    for row in report.rows:
        lines.extend(_row_lines(row))
        lines.append("")
    if report.bounds is not None:
        lines.append("[Bounds]")
        for key in sorted(report.bounds):
            if key != "sources":
                lines.append(f"  {key}: {report.bounds[key]}")
        lines.append("")
    if report.check is not None:
        lines.append("[Check]")
        lines.append(f"  feasible     : {'yes' if report.check['feasible'] else 'NO'}")
        lines.append(f"  worst margin : {report.check['worst_margin']:.3e}")
        lines.append("")
    for name, trace_path in sorted(report.traces.items()):
        lines.append(f"trace {name}: {trace_path}")
    lines.append(MACHINE_MARKER)
    return "\n".join(lines) + "\n" + dump_json_text(report.to_dict())


def write_solution_report(report: ExperimentReport, path: Path) -> Path:
    """Human-readable table (1-decimal x and beta, 3-decimal CV) plus a full-precision JSON block."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(format_solution_report(report))
    logger.info("Wrote solution report %s", path)
    return path


def read_solution_report(path: Path) -> ExperimentReport:
    text = Path(path).read_text(encoding="utf-8")
    _, marker, block = text.partition(MACHINE_MARKER + "\n")
    if not marker:
        raise ValueError(f"{path} has no machine-readable block")
    return ExperimentReport.from_dict(json.loads(block))


def write_experiment_outputs(report: ExperimentReport, out_dir: Path) -> Path:
    """Write every trace table and then the report that lists them."""
    out_dir = Path(out_dir)
    for name, table in sorted(report.trace_tables.items()):
        trace_path = write_trace_csv(table, out_dir / f"{report.command}_{name}_trace.csv")
        report.traces[name] = trace_path.name
    return write_solution_report(report, out_dir / f"{report.command}_report.txt")
