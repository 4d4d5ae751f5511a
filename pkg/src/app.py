"""Flex-O command-line orchestrator."""
import argparse
import json
import logging
from pathlib import Path
from typing import List, Optional

from features.harness import (
    COMMANDS,
    Scenario,
    generate_example_document,
    run_experiment,
    write_experiment_outputs,
)
from features.problem_core.models import Decision
from shared.config import ScenarioManager
from shared.constants import (
    APP_NAME,
    APP_VERSION,
    EXIT_FAILURE,
    EXIT_INFEASIBLE,
    EXIT_INVALID_SCENARIO,
    EXIT_NON_CONVERGENCE,
    EXIT_OK,
    OFFICE_CORRIDOR_SCENARIO,
)
from shared.utils import InvalidScenarioError, ReferenceNonConvergenceError, StageError

logger = logging.getLogger(__name__)

GEN_EXAMPLE = "gen-example"
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="flexo", description=f"{APP_NAME} {APP_VERSION} experiment harness")
    parser.add_argument("--version", action="version", version=f"{APP_NAME} {APP_VERSION}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", type=Path, help="scenario JSON file (default: the shipped office-corridor one)")
    common.add_argument("--out", type=str, help="output directory (overrides output.dir)")
    common.add_argument("--seed", type=int, help="master seed; re-derives every named stream")
    common.add_argument("--iters", type=int, help="iteration budget for B-PD and MS-PD")
    common.add_argument("--realizations", type=int, help="number of B-PD realizations")
    common.add_argument("--T", dest="T", type=int, help="MS-PD steps inside Flex-O")
    common.add_argument("--log-level", default="INFO", choices=LOG_LEVELS)

    commands = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = commands.add_parser(name, parents=[common], help=f"run the '{name}' experiment")
        if name == "check":
            sub.add_argument("--decision", help='decision as JSON {"x": [...], "beta": [...]} or a path to one')
    commands.add_parser(GEN_EXAMPLE, parents=[common], help="write an office-corridor scenario file for --seed")
    return parser


def parse_decision(value: str) -> Decision:
    """Decision from inline JSON or from a JSON file."""
    text = value
    candidate = Path(value)
    if not value.lstrip().startswith("{") and candidate.is_file():
        text = candidate.read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
        return Decision(x=payload["x"], beta=payload["beta"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise InvalidScenarioError(f"--decision is not a valid decision: {exc}") from exc


class App:
    """Runs one harness command and maps the outcome to an exit code."""

    def __init__(self, args: argparse.Namespace):
        self._args = args

    @property
    def command(self) -> str:
        return self._args.command

    def start(self) -> int:
        """Run the command; every failure ends in a logged exit code."""
        try:
            if self.command == GEN_EXAMPLE:
                return self._generate_example()
            return self._run_command()
        except InvalidScenarioError as exc:
            logger.error("Invalid scenario: %s", exc)
            return EXIT_INVALID_SCENARIO
        except ReferenceNonConvergenceError as exc:
            logger.error("%s", exc)
            return EXIT_NON_CONVERGENCE
        except StageError as exc:
            logger.error("%s", exc)
            if isinstance(exc.cause, ReferenceNonConvergenceError):
                return EXIT_NON_CONVERGENCE
            return EXIT_FAILURE
        except Exception as exc:
            logger.exception("Command '%s' failed: %s", self.command, exc)
            return EXIT_FAILURE

    def _load_manager(self) -> ScenarioManager:
        args = self._args
        manager = ScenarioManager(path=args.scenario or OFFICE_CORRIDOR_SCENARIO)
        manager.load()
        manager.apply_overrides(
            seed=args.seed,
            iters=args.iters,
            realizations=args.realizations,
            T=args.T,
            out_dir=args.out,
        )
        return manager

    def _run_command(self) -> int:
        scenario = Scenario.from_document(self._load_manager().document)
        decision = None
        if self.command == "check":
            raw = getattr(self._args, "decision", None)
            decision = parse_decision(raw) if raw else None
            if decision is None and scenario.check is None:
                raise InvalidScenarioError("check needs a decision (scenario 'check' section or --decision)")
            if decision is not None and decision.n != scenario.problem.n:
                raise InvalidScenarioError(f"--decision has {decision.n} users, scenario has {scenario.problem.n}")

        report = run_experiment(scenario, self.command, decision=decision)
        path = write_experiment_outputs(report, scenario.output_dir)
        logger.info("Report written to %s", path)
        print(path)

        if self.command == "check" and not report.feasible:
            logger.warning("Checked decision is NOT robustly feasible")
            return EXIT_INFEASIBLE
        if not report.converged:
            logger.warning("'%s' did not converge; see %s", self.command, path)
            return EXIT_NON_CONVERGENCE
        return EXIT_OK

    def _generate_example(self) -> int:
        args = self._args
        seed = 0 if args.seed is None else args.seed
        document = generate_example_document(seed)
        out_dir = Path(args.out) if args.out else Path(document["output"]["dir"])
        target = args.scenario or out_dir / f"example_{seed}.json"
        manager = ScenarioManager(path=target, document=document)
        if not manager.save():
            logger.error("Could not write example scenario to %s", target)
            return EXIT_FAILURE
        logger.info("Example scenario for seed %d written to %s", seed, target)
        print(target)
        return EXIT_OK


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv and run; used by tests that skip logging setup."""
    return App(build_parser().parse_args(argv)).start()
