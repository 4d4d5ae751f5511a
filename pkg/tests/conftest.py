"""
pytest configuration and fixtures for the Flex-O tests.
Small instances with hand-checkable optima plus a tame saddle instance.
"""

import copy
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

# Add project paths needed by tests regardless of how pytest is invoked.
TESTS_DIR = os.path.dirname(__file__)
PROJECT_ROOT = os.path.abspath(os.path.join(TESTS_DIR, ".."))
SRC_ROOT = os.path.join(PROJECT_ROOT, "src")

sys.path.insert(0, PROJECT_ROOT)
sys.path.insert(0, SRC_ROOT)

from features.problem_core import Decision, FlexProblem  # noqa: E402
from features.response_models import NoiseSpec, ResponseModel  # noqa: E402
from features.saddle_dynamics import ChanceParams, SearchRegion  # noqa: E402

TAME_DOCUMENT = {
    "name": "tame",
    "seed": 7,
    "problem": {
        "n": 2,
        "epsilon_x": 1.0,
        "epsilon_beta": 2.0,
        "weights": [0.5, 0.8],
        "x_ref": [1.0, -0.5],
        "gamma": 4.0,
        "D": [],
        "e": None,
    },
    "chance": {"u": 20.0, "delta": 0.2, "nu": 1.0},
    "region": {"x_margin": 2.0, "beta_max": 1.0, "lambda_max": 2.0},
    "models": {
        "true": {
            "kind": "custom-additive",
            "offset": 0.0,
            "x_slope": 0.1,
            "pivot": 0.0,
            "beta_slope": 0.1,
            "noise": {"family": "normal", "loc": 0.0, "scale": 0.1},
        },
        "misspecified": {
            "kind": "custom-additive",
            "offset": 0.0,
            "x_slope": 0.1,
            "pivot": 0.0,
            "beta_slope": 0.0,
            "noise": None,
        },
    },
    "algorithm": {
        "eta": 0.1,
        "iters": 30,
        "T": 20,
        "T_sweep": [0, 20],
        "realizations": 3,
        "cv_samples": 500,
        "cv_window": 10,
        "reference_tol": 1e-10,
        "reference_max_iters": 20000,
    },
    "estimators": {"pairs": 200, "points": 5, "samples": 200},
}


@pytest.fixture
def tiny_problem() -> FlexProblem:
    """n=1, x_ref=20, gamma=4: robust optimum (x, beta) = (20, 2)."""
    return FlexProblem(epsilon_x=0.001, epsilon_beta=0.01, weights=[1.0], x_ref=[20.0], gamma=4.0)


@pytest.fixture
def corridor_problem() -> FlexProblem:
    """n=2 with one corridor row x1 - x2 <= 1."""
    return FlexProblem(
        epsilon_x=0.001, epsilon_beta=0.01, weights=[1.0, 1.0], x_ref=[20.0, 20.0], gamma=4.0,
        D=[[1.0, -1.0]], e=[1.0],
    )


@pytest.fixture
def tame_problem() -> FlexProblem:
    return FlexProblem(epsilon_x=1.0, epsilon_beta=2.0, weights=[0.5, 0.8], x_ref=[1.0, -0.5], gamma=4.0)


@pytest.fixture
def tame_chance() -> ChanceParams:
    return ChanceParams(u=20.0, delta=0.2, nu=1.0)


@pytest.fixture
def tame_region(tame_problem) -> SearchRegion:
    return SearchRegion.around(tame_problem, x_margin=2.0, beta_max=1.0, lambda_max=2.0)


@pytest.fixture
def tame_model() -> ResponseModel:
    """Deterministic additive model with slope 0.1 in x and in beta."""
    return ResponseModel(kind="custom-additive", offset=0.0, x_slope=0.1, pivot=0.0, beta_slope=0.1)


@pytest.fixture
def tame_noisy_model(tame_model) -> ResponseModel:
    return replace(tame_model, noise=NoiseSpec(scale=0.1))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def tame_document(tmp_path) -> dict:
    document = copy.deepcopy(TAME_DOCUMENT)
    document["output"] = {"dir": str(tmp_path / "out")}
    return document


@pytest.fixture
def tame_scenario_file(tmp_path, tame_document) -> Path:
    path = tmp_path / "tame.json"
    path.write_text(json.dumps(tame_document), encoding="utf-8")
    return path


@pytest.fixture
def decision_factory():
    def make(x, beta) -> Decision:
        return Decision(x=np.asarray(x, dtype=float), beta=np.asarray(beta, dtype=float))
    return make
