"""Scenario schema normalization helpers."""

from __future__ import annotations

import copy
from typing import Any, Dict, List, Optional

import numpy as np

from shared.config_defaults import build_default_scenario
from shared.constants import SEED_STREAMS
from shared.utils import InvalidScenarioError

_MODEL_KINDS = {
    "true-piecewise": ("lower", "upper"),
    "misspecified-linear": ("pivot",),
    "custom-additive": ("offset", "x_slope", "pivot", "beta_slope"),
}
_NOISE_FAMILIES = ("normal",)
_CORRIDORS = ("one-sided", "two-sided")
_CV_METHODS = ("monte-carlo", "exact")
_CONSTANT_NAMES = ("mu", "L", "eps", "sigma", "B")


def derive_seeds(master_seed: int) -> Dict[str, int]:
    """Expand one master seed into one independent seed per named stream."""
    state = np.random.SeedSequence(int(master_seed)).generate_state(len(SEED_STREAMS))
    return {name: int(value) for name, value in zip(SEED_STREAMS, state)}


def _number(section: str, key: str, value: Any, *, minimum: Optional[float] = None,
            strict: bool = False, maximum: Optional[float] = None) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidScenarioError(f"{section}.{key} must be a number, got {value!r}")
    number = float(value)
    if not np.isfinite(number):
        raise InvalidScenarioError(f"{section}.{key} must be finite")
    if minimum is not None and (number < minimum or (strict and number == minimum)):
        relation = ">" if strict else ">="
        raise InvalidScenarioError(f"{section}.{key} must be {relation} {minimum}, got {number}")
    if maximum is not None and number > maximum:
        raise InvalidScenarioError(f"{section}.{key} must be <= {maximum}, got {number}")
    return number


def _integer(section: str, key: str, value: Any, minimum: int = 0) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidScenarioError(f"{section}.{key} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidScenarioError(f"{section}.{key} must be >= {minimum}, got {value}")
    return value


def _flag(section: str, key: str, value: Any) -> bool:
    if not isinstance(value, bool):
        raise InvalidScenarioError(f"{section}.{key} must be true or false")
    return value


def _vector(section: str, key: str, value: Any, size: int) -> Optional[List[float]]:
    if value is None:
        return None
    if not isinstance(value, list) or len(value) != size:
        raise InvalidScenarioError(f"{section}.{key} must be a list of {size} numbers")
    return [_number(section, key, item) for item in value]


def _merge_section(name: str, defaults: dict, raw: Any) -> dict:
    if raw is None:
        return copy.deepcopy(defaults)
    if not isinstance(raw, dict):
        raise InvalidScenarioError(f"section '{name}' must be a mapping")
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise InvalidScenarioError(f"unknown key(s) in '{name}': {', '.join(unknown)}")
    merged = copy.deepcopy(defaults)
    merged.update(raw)
    return merged


def normalize_noise(where: str, raw: Any) -> Optional[dict]:
    """Validate a noise spec; None means a deterministic model."""
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise InvalidScenarioError(f"{where}.noise must be a mapping or null")
    family = raw.get("family", "normal")
    if family not in _NOISE_FAMILIES:
        raise InvalidScenarioError(f"{where}.noise.family must be one of {_NOISE_FAMILIES}")
    return {
        "family": family,
        "loc": _number(f"{where}.noise", "loc", raw.get("loc", 0.0)),
        "scale": _number(f"{where}.noise", "scale", raw.get("scale", 0.0), minimum=0.0),
    }


def normalize_model_spec(where: str, raw: Any) -> dict:
    """Validate one response-model spec."""
    if not isinstance(raw, dict):
        raise InvalidScenarioError(f"{where} must be a mapping")
    kind = raw.get("kind")
    if kind not in _MODEL_KINDS:
        raise InvalidScenarioError(f"{where}.kind must be one of {sorted(_MODEL_KINDS)}, got {kind!r}")
    allowed = set(_MODEL_KINDS[kind]) | {"kind", "noise"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise InvalidScenarioError(f"unknown key(s) in '{where}': {', '.join(unknown)}")
    spec: Dict[str, Any] = {"kind": kind}
    for key in _MODEL_KINDS[kind]:
        if key not in raw:
            raise InvalidScenarioError(f"{where}.{key} is required for kind {kind}")
        spec[key] = _number(where, key, raw[key])
    if kind == "true-piecewise" and spec["lower"] > spec["upper"]:
        raise InvalidScenarioError(f"{where}.lower must not exceed {where}.upper")
    spec["noise"] = normalize_noise(where, raw.get("noise"))
    return spec


def _normalize_problem(problem: dict) -> dict:
    n = _integer("problem", "n", problem["n"], minimum=1)
    problem["n"] = n
    problem["epsilon_x"] = _number("problem", "epsilon_x", problem["epsilon_x"], minimum=0.0, strict=True)
    problem["epsilon_beta"] = _number("problem", "epsilon_beta", problem["epsilon_beta"], minimum=0.0, strict=True)
    problem["weights"] = _vector("problem", "weights", problem["weights"], n)
    if problem["weights"] is not None and min(problem["weights"]) < 0:
        raise InvalidScenarioError("problem.weights must be nonnegative")
    weight_range = problem["weight_range"]
    if not isinstance(weight_range, list) or len(weight_range) != 2:
        raise InvalidScenarioError("problem.weight_range must be [low, high]")
    low = _number("problem", "weight_range", weight_range[0])
    high = _number("problem", "weight_range", weight_range[1])
    if not 0.0 <= float(low) <= float(high):
        raise InvalidScenarioError("problem.weight_range must satisfy 0 <= low <= high")
    problem["weight_range"] = [float(low), float(high)]
    problem["x_ref"] = _vector("problem", "x_ref", problem["x_ref"], n)
    problem["x_ref_mean"] = _number("problem", "x_ref_mean", problem["x_ref_mean"])
    problem["x_ref_std"] = _number("problem", "x_ref_std", problem["x_ref_std"], minimum=0.0)
    if problem["gamma"] is not None:
        problem["gamma"] = _number("problem", "gamma", problem["gamma"], minimum=0.0, strict=True)
    if problem["corridor"] not in _CORRIDORS:
        raise InvalidScenarioError(f"problem.corridor must be one of {_CORRIDORS}")
    matrix = problem["D"]
    if matrix is not None:
        if not isinstance(matrix, list) or any(not isinstance(row, list) or len(row) != n for row in matrix):
            raise InvalidScenarioError(f"problem.D must be a list of rows of length {n}")
        problem["D"] = [[_number("problem", "D", item) for item in row] for row in matrix]
        rows = len(matrix)
        problem["e"] = _vector("problem", "e", problem["e"], rows) if problem["e"] is not None else [1.0] * rows
    elif problem["e"] is not None:
        raise InvalidScenarioError("problem.e requires an explicit problem.D")
    return problem


def _normalize_algorithm(algorithm: dict) -> dict:
    algorithm["eta"] = _number("algorithm", "eta", algorithm["eta"], minimum=0.0, strict=True)
    algorithm["iters"] = _integer("algorithm", "iters", algorithm["iters"])
    algorithm["T"] = _integer("algorithm", "T", algorithm["T"])
    if not isinstance(algorithm["T_sweep"], list):
        raise InvalidScenarioError("algorithm.T_sweep must be a list of integers")
    algorithm["T_sweep"] = [_integer("algorithm", "T_sweep", value) for value in algorithm["T_sweep"]]
    algorithm["realizations"] = _integer("algorithm", "realizations", algorithm["realizations"], minimum=1)
    algorithm["guard"] = _flag("algorithm", "guard", algorithm["guard"])
    algorithm["round"] = _flag("algorithm", "round", algorithm["round"])
    algorithm["resolution"] = _number("algorithm", "resolution", algorithm["resolution"], minimum=0.0, strict=True)
    algorithm["quadrature_nodes"] = _integer("algorithm", "quadrature_nodes", algorithm["quadrature_nodes"], minimum=2)
    if algorithm["cv_method"] not in _CV_METHODS:
        raise InvalidScenarioError(f"algorithm.cv_method must be one of {_CV_METHODS}")
    algorithm["cv_samples"] = _integer("algorithm", "cv_samples", algorithm["cv_samples"], minimum=1)
    algorithm["cv_window"] = _integer("algorithm", "cv_window", algorithm["cv_window"], minimum=1)
    algorithm["reference_tol"] = _number("algorithm", "reference_tol", algorithm["reference_tol"],
                                         minimum=0.0, strict=True)
    algorithm["reference_max_iters"] = _integer("algorithm", "reference_max_iters",
                                                algorithm["reference_max_iters"], minimum=1)
    return algorithm


def _normalize_seeds(master_seed: int, raw: Any) -> Dict[str, int]:
    seeds = derive_seeds(master_seed)
    if raw is None:
        return seeds
    if not isinstance(raw, dict):
        raise InvalidScenarioError("seeds must be a mapping of stream name to integer")
    unknown = sorted(set(raw) - set(SEED_STREAMS))
    if unknown:
        raise InvalidScenarioError(f"unknown seed stream(s): {', '.join(unknown)}")
    for name, value in raw.items():
        seeds[name] = _integer("seeds", name, value)
    return seeds


def _normalize_check(raw: Any, n: int) -> Optional[dict]:
    if raw is None:
        return None
    if not isinstance(raw, dict) or set(raw) != {"x", "beta"}:
        raise InvalidScenarioError("check must be a mapping with keys 'x' and 'beta'")
    return {"x": _vector("check", "x", raw["x"], n), "beta": _vector("check", "beta", raw["beta"], n)}


def normalize_scenario(raw: object) -> dict:
    """
    Fill defaults and validate a raw scenario document.

    Returns:
        A new, fully populated document. Raises InvalidScenarioError naming the
        first offending key.
    """
    if not isinstance(raw, dict):
        raise InvalidScenarioError("scenario must be a JSON object")
    defaults = build_default_scenario()
    unknown = sorted(set(raw) - set(defaults))
    if unknown:
        raise InvalidScenarioError(f"unknown top-level key(s): {', '.join(unknown)}")

    name = raw.get("name", defaults["name"])
    if not isinstance(name, str) or not name:
        raise InvalidScenarioError("name must be a non-empty string")
    master_seed = _integer("scenario", "seed", raw.get("seed", defaults["seed"]))

    document: Dict[str, Any] = {"name": name, "seed": master_seed}
    document["problem"] = _normalize_problem(_merge_section("problem", defaults["problem"], raw.get("problem")))

    chance = _merge_section("chance", defaults["chance"], raw.get("chance"))
    document["chance"] = {
        "u": _number("chance", "u", chance["u"], minimum=0.0, strict=True),
        "delta": _number("chance", "delta", chance["delta"], minimum=0.0, strict=True, maximum=1.0),
        "nu": _number("chance", "nu", chance["nu"], minimum=0.0),
    }

    region = _merge_section("region", defaults["region"], raw.get("region"))
    document["region"] = {
        "x_margin": _number("region", "x_margin", region["x_margin"], minimum=0.0),
        "beta_max": _number("region", "beta_max", region["beta_max"], minimum=0.0),
        "lambda_max": _number("region", "lambda_max", region["lambda_max"], minimum=0.0),
    }

    models = _merge_section("models", defaults["models"], raw.get("models"))
    document["models"] = {
        "true": normalize_model_spec("models.true", models["true"]),
        "misspecified": normalize_model_spec("models.misspecified", models["misspecified"]),
    }

    document["algorithm"] = _normalize_algorithm(
        _merge_section("algorithm", defaults["algorithm"], raw.get("algorithm"))
    )

    solver = _merge_section("solver", defaults["solver"], raw.get("solver"))
    document["solver"] = {
        "tol": _number("solver", "tol", solver["tol"], minimum=0.0, strict=True),
        "max_iters": _integer("solver", "max_iters", solver["max_iters"], minimum=1),
        "max_outer": _integer("solver", "max_outer", solver["max_outer"], minimum=1),
        "inner_max_iters": _integer("solver", "inner_max_iters", solver["inner_max_iters"], minimum=1),
        "penalty_init": _number("solver", "penalty_init", solver["penalty_init"], minimum=0.0, strict=True),
        "penalty_growth": _number("solver", "penalty_growth", solver["penalty_growth"], minimum=1.0, strict=True),
        "penalty_max": _number("solver", "penalty_max", solver["penalty_max"], minimum=0.0, strict=True),
        "multiplier_cap": _number("solver", "multiplier_cap", solver["multiplier_cap"], minimum=0.0, strict=True),
        "polish_bisections": _integer("solver", "polish_bisections", solver["polish_bisections"], minimum=1),
        "oracle_cap": _integer("solver", "oracle_cap", solver["oracle_cap"], minimum=1),
    }
    if document["solver"]["penalty_max"] < document["solver"]["penalty_init"]:
        raise InvalidScenarioError("solver.penalty_max must be >= solver.penalty_init")

    estimators = _merge_section("estimators", defaults["estimators"], raw.get("estimators"))
    document["estimators"] = {
        key: _integer("estimators", key, estimators[key], minimum=1) for key in ("pairs", "points", "samples")
    }

    constants = raw.get("constants") or {}
    if not isinstance(constants, dict) or set(constants) - set(_CONSTANT_NAMES):
        raise InvalidScenarioError(f"constants may only override {_CONSTANT_NAMES}")
    document["constants"] = {
        key: _number("constants", key, value, minimum=0.0) for key, value in constants.items()
    }

    document["seeds"] = _normalize_seeds(master_seed, raw.get("seeds"))
    document["check"] = _normalize_check(raw.get("check"), document["problem"]["n"])

    output = _merge_section("output", defaults["output"], raw.get("output"))
    if not isinstance(output["dir"], str) or not output["dir"]:
        raise InvalidScenarioError("output.dir must be a non-empty string")
    document["output"] = {"dir": output["dir"]}
    return document
