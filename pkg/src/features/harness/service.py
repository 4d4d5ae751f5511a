"""Experiment orchestration for the harness commands."""
from __future__ import annotations

import logging
from typing import Callable, Dict, List, Optional

import numpy as np

from features.flexo_pipeline.service import certify, emit_user_sets, run_flexo
from features.harness.models import COMMANDS, AlgorithmRow, ExperimentReport
from features.harness.parallel_executor import log_resident_memory, run_realizations
from features.harness.reports import aggregate_tables, trace_table
from features.harness.scenario import Scenario
from features.problem_core.models import Decision
from features.problem_core.service import eval_objective
from features.robust_solver.service import build_reformulation, solve_reformulation
from features.response_models.estimators import estimate_lipschitz_eps
from features.saddle_dynamics.bounds import estimate_constants, estimate_mu_L, step_size_range
from features.saddle_dynamics.metrics import (
    chance_violation_probability,
    chernoff_terms,
    constraint_violation_metric,
)
from features.saddle_dynamics.models import ConstantsReport, IterateTrace, SaddlePoint
from features.saddle_dynamics.service import bpd_run, compute_reference_equilibrium, mspd_run
from shared.utils import DomainError, UnknownCommandError

logger = logging.getLogger(__name__)


def _window_cv(scenario: Scenario, decisions: List[Decision]) -> float:
    algorithm = scenario.algorithm
    return constraint_violation_metric(
        scenario.problem,
        decisions,
        scenario.true_model,
        samples=algorithm["cv_samples"],
        rng=scenario.generator("cv"),
        method=algorithm["cv_method"],
        window=algorithm["cv_window"],
        nodes=algorithm["quadrature_nodes"],
    )


def _reference_constants(scenario: Scenario) -> ConstantsReport:
    """mu, L and eps only, enough to judge uniqueness of the reference."""
    overrides = {name: value for name, value in scenario.constants.items() if name in ("mu", "L", "eps")}
    rng = scenario.generator("estimators")
    pairs = scenario.estimators["pairs"]
    mu_l = estimate_mu_L(scenario.problem, scenario.chance, scenario.region, pairs, rng)
    eps = estimate_lipschitz_eps(scenario.true_model, scenario.region.y_box, pairs, rng).value
    return ConstantsReport(mu=mu_l.mu, L=mu_l.L, eps=eps).with_overrides(overrides)


def _robust_start(scenario: Scenario) -> SaddlePoint:
    """Robust decision with zero multipliers, the warm start of both primal-dual methods."""
    solved = solve_reformulation(build_reformulation(scenario.problem), scenario.solver)
    if not solved.converged:
        logger.warning("Robust warm start did not converge (kkt=%.3e); starting from it anyway", solved.kkt_residual)
    return SaddlePoint(y=solved.decision, lam=np.zeros(scenario.problem.m))


def compute_reference(scenario: Scenario) -> SaddlePoint:
    algorithm = scenario.algorithm
    return compute_reference_equilibrium(
        scenario.problem,
        scenario.chance,
        scenario.region,
        scenario.true_model,
        algorithm["eta"],
        tol=algorithm["reference_tol"],
        max_iters=algorithm["reference_max_iters"],
        constants=_reference_constants(scenario),
        nodes=algorithm["quadrature_nodes"],
    )


def _run_robust(scenario: Scenario, report: ExperimentReport) -> None:
    solved = solve_reformulation(build_reformulation(scenario.problem), scenario.solver)
    certificate = certify(scenario.problem, solved.decision, scenario.oracle_cap)
    report.rows.append(AlgorithmRow.from_arrays(
        "Robust", solved.decision.x, solved.decision.beta, solved.objective_value,
        cv=_window_cv(scenario, [solved.decision]),
        feasible=certificate.feasible,
        converged=solved.converged,
        details={
            "kkt_residual": solved.kkt_residual,
            "iterations": solved.iterations,
            "shrink_factor": solved.shrink_factor,
            "certificate": certificate.to_dict(),
        },
    ))


def _run_reference(scenario: Scenario, report: ExperimentReport) -> None:
    reference = compute_reference(scenario)
    report.rows.append(AlgorithmRow.from_arrays(
        "True D(y) p.-d.", reference.y.x, reference.y.beta, eval_objective(scenario.problem, reference.y),
        cv=_window_cv(scenario, [reference.y]),
        converged=True,
        details={"lambda": [float(v) for v in reference.lam]},
    ))


def _run_mspd(scenario: Scenario, report: ExperimentReport) -> None:
    reference = compute_reference(scenario)
    algorithm = scenario.algorithm
    trace = mspd_run(
        scenario.problem, scenario.chance, scenario.region, scenario.ms_model,
        algorithm["eta"], algorithm["iters"],
        start=_robust_start(scenario),
        reference=reference, cv_model=scenario.true_model, nodes=algorithm["quadrature_nodes"],
    )
    final = trace.final
    report.rows.append(AlgorithmRow.from_arrays(
        "Misspecified MS-PD", final.y.x, final.y.beta, final.objective,
        cv=_window_cv(scenario, trace.decisions(algorithm["cv_window"])),
        details={"final_distance": final.dist_to_ref, "lambda": [float(v) for v in final.lam]},
    ))
    report.trace_tables["mspd"] = trace_table(trace)


def _run_bpd(scenario: Scenario, report: ExperimentReport) -> None:
    reference = compute_reference(scenario)
    algorithm = scenario.algorithm
    start = _robust_start(scenario)

    def realization(index: int, _item) -> IterateTrace:
        return bpd_run(
            scenario.problem, scenario.chance, scenario.region, scenario.true_model,
            algorithm["eta"], algorithm["iters"], scenario.generator("bpd", index),
            start=start,
            reference=reference,
            cv_model=scenario.true_model if index == 0 else None,
            nodes=algorithm["quadrature_nodes"],
        )

    traces = run_realizations(range(algorithm["realizations"]), realization)
    log_resident_memory(f"B-PD batch of {len(traces)} realizations")
    finals_x = np.vstack([trace.final.y.x for trace in traces])
    finals_beta = np.vstack([trace.final.y.beta for trace in traces])
    objective = float(np.mean([trace.final.objective for trace in traces]))
    ddof = 1 if len(traces) > 1 else 0
    report.rows.append(AlgorithmRow.from_arrays(
        "B-PD", finals_x.mean(axis=0), finals_beta.mean(axis=0), objective,
        cv=_window_cv(scenario, traces[0].decisions(algorithm["cv_window"])),
        details={
            "realizations": len(traces),
            "x_sd": [float(v) for v in finals_x.std(axis=0, ddof=ddof)],
            "beta_sd": [float(v) for v in finals_beta.std(axis=0, ddof=ddof)],
        },
    ))
    report.trace_tables["bpd"] = aggregate_tables(traces)


def flexo_T_values(scenario: Scenario) -> List[int]:
    """The configured T first, then the sweep values not equal to it."""
    main = scenario.algorithm["T"]
    return [main] + [T for T in scenario.algorithm["T_sweep"] if T != main]


def _run_flexo(scenario: Scenario, report: ExperimentReport) -> None:
    T_values = flexo_T_values(scenario)

    def pipeline(_index: int, T: int):
        return run_flexo(scenario.problem, scenario.pipeline_config(T), true_model=scenario.true_model)

    results = run_realizations(T_values, pipeline)
    log_resident_memory(f"Flex-O sweep over T={T_values}")
    for T, (assignment, trace) in zip(T_values, results):
        certificate = assignment.certificate
        report.rows.append(AlgorithmRow.from_arrays(
            f"[Flex-O] T={T}", assignment.decision.x, assignment.decision.beta,
            eval_objective(scenario.problem, assignment.decision),
            cv=assignment.cv_estimate,
            feasible=certificate.feasible if certificate is not None else None,
            converged=assignment.robust_converged and assignment.guard_converged is not False,
            details={
                "T": T,
                "stages": assignment.stages,
                "intervals": emit_user_sets(assignment),
                "provenance": {
                    stage: {"x": [float(v) for v in d.x], "beta": [float(v) for v in d.beta]}
                    for stage, d in assignment.provenance.items()
                },
            },
        ))
    report.trace_tables["flexo"] = trace_table(results[0][1])


def _run_bounds(scenario: Scenario, report: ExperimentReport) -> None:
    estimators = scenario.estimators
    constants = estimate_constants(
        scenario.problem, scenario.chance, scenario.region, scenario.true_model, scenario.ms_model,
        scenario.generator("estimators"),
        pairs=estimators["pairs"], points=estimators["points"], samples=estimators["samples"],
        overrides=scenario.constants,
        noise_rng=scenario.generator("noise"),
    )
    eta = scenario.algorithm["eta"]
    bounds = constants.to_dict(eta)
    if constants.mu > 0 and constants.L > 0:
        step_range = step_size_range(constants.mu, constants.L, constants.eps)
        bounds["step_range"] = {"low": step_range.low, "high": step_range.high, "empty": step_range.empty}
    report.bounds = bounds


def _run_check(scenario: Scenario, report: ExperimentReport, decision: Optional[Decision]) -> None:
    decision = decision or scenario.check
    if decision is None:
        raise DomainError("check needs a decision (scenario 'check' section or --decision)")
    certificate = certify(scenario.problem, decision, scenario.oracle_cap)
    check = certificate.to_dict()
    check["chernoff_terms"] = [float(v) for v in chernoff_terms(
        scenario.problem, scenario.chance, decision, scenario.true_model, scenario.algorithm["quadrature_nodes"]
    )]
    violation = chance_violation_probability(
        scenario.problem, decision, scenario.true_model, scenario.algorithm["cv_samples"], scenario.generator("cv")
    )
    check["violation_probability"] = [float(v) for v in violation.probability]
    check["violation_standard_error"] = [float(v) for v in violation.standard_error]
    report.check = check
    report.rows.append(AlgorithmRow.from_arrays(
        "Checked decision", decision.x, decision.beta, eval_objective(scenario.problem, decision),
        cv=_window_cv(scenario, [decision]),
        feasible=certificate.feasible,
    ))


_DISPATCH: Dict[str, Callable[[Scenario, ExperimentReport], None]] = {
    "robust": _run_robust,
    "reference": _run_reference,
    "mspd": _run_mspd,
    "bpd": _run_bpd,
    "flexo": _run_flexo,
    "bounds": _run_bounds,
}


def run_experiment(scenario: Scenario, which: str, decision: Optional[Decision] = None) -> ExperimentReport:
    """Dispatch one harness command; files are written afterwards by the caller."""
    if which not in COMMANDS:
        raise UnknownCommandError(f"unknown experiment '{which}'; expected one of {', '.join(COMMANDS)}")
    logger.info("Running '%s' on scenario '%s'", which, scenario.name)
    report = ExperimentReport(scenario=scenario.name, command=which)
    if which == "check":
        _run_check(scenario, report, decision)
    else:
        _DISPATCH[which](scenario, report)
    logger.info("'%s' finished: %d solution row(s)", which, len(report.rows))
    return report
