"""Default scenario payload helpers."""
from shared.constants import (
    CV_SAMPLES,
    CV_WINDOW,
    DEFAULT_BETA_MAX,
    DEFAULT_DELTA,
    DEFAULT_ESTIMATOR_POINTS,
    DEFAULT_ESTIMATOR_SAMPLES,
    DEFAULT_ETA,
    DEFAULT_INNER_MAX_ITERS,
    DEFAULT_KKT_TOLERANCE,
    DEFAULT_LAMBDA_MAX,
    DEFAULT_MAX_ITERS,
    DEFAULT_MAX_OUTER,
    DEFAULT_MULTIPLIER_CAP,
    DEFAULT_NU,
    DEFAULT_OUT_DIR,
    DEFAULT_PAIR_COUNT,
    DEFAULT_PENALTY_GROWTH,
    DEFAULT_PENALTY_INIT,
    DEFAULT_PENALTY_MAX,
    DEFAULT_RESOLUTION,
    DEFAULT_T,
    DEFAULT_T_SWEEP,
    DEFAULT_U,
    DEFAULT_X_MARGIN,
    MISSPECIFIED_PIVOT,
    OFFICE_EPSILON_BETA,
    OFFICE_EPSILON_X,
    OFFICE_ITERS,
    OFFICE_N,
    OFFICE_REALIZATIONS,
    OFFICE_WEIGHT_RANGE,
    OFFICE_X_REF_MEAN,
    OFFICE_X_REF_STD,
    POLISH_BISECTIONS,
    QUADRATURE_NODES,
    REFERENCE_MAX_ITERS,
    REFERENCE_TOLERANCE,
    TRUE_MODEL_LOWER,
    TRUE_MODEL_UPPER,
    TRUE_NOISE_SCALE,
    VERTEX_ORACLE_CAP,
)


def build_default_scenario(name: str = "default") -> dict:
    """Return the default scenario document (office-corridor constants, generated data)."""
    return {
        "name": name,
        "seed": 0,
        "problem": {
            "n": OFFICE_N,
            "epsilon_x": OFFICE_EPSILON_X,
            "epsilon_beta": OFFICE_EPSILON_BETA,
            "weights": None,
            "weight_range": list(OFFICE_WEIGHT_RANGE),
            "x_ref": None,
            "x_ref_mean": OFFICE_X_REF_MEAN,
            "x_ref_std": OFFICE_X_REF_STD,
            # None means gamma = 2n
            "gamma": None,
            "corridor": "one-sided",
            "D": None,
            "e": None,
        },
        "chance": {"u": DEFAULT_U, "delta": DEFAULT_DELTA, "nu": DEFAULT_NU},
        "region": {
            "x_margin": DEFAULT_X_MARGIN,
            "beta_max": DEFAULT_BETA_MAX,
            "lambda_max": DEFAULT_LAMBDA_MAX,
        },
        "models": {
            "true": {
                "kind": "true-piecewise",
                "lower": TRUE_MODEL_LOWER,
                "upper": TRUE_MODEL_UPPER,
                "noise": {"family": "normal", "loc": 0.0, "scale": TRUE_NOISE_SCALE},
            },
            "misspecified": {
                "kind": "misspecified-linear",
                "pivot": MISSPECIFIED_PIVOT,
                "noise": None,
            },
        },
        "algorithm": {
            "eta": DEFAULT_ETA,
            "iters": OFFICE_ITERS,
            "T": DEFAULT_T,
            "T_sweep": list(DEFAULT_T_SWEEP),
            "realizations": OFFICE_REALIZATIONS,
            "guard": True,
            "round": False,
            "resolution": DEFAULT_RESOLUTION,
            "quadrature_nodes": QUADRATURE_NODES,
            "cv_method": "monte-carlo",
            "cv_samples": CV_SAMPLES,
            "cv_window": CV_WINDOW,
            "reference_tol": REFERENCE_TOLERANCE,
            "reference_max_iters": REFERENCE_MAX_ITERS,
        },
        "solver": {
            "tol": DEFAULT_KKT_TOLERANCE,
            "max_iters": DEFAULT_MAX_ITERS,
            "max_outer": DEFAULT_MAX_OUTER,
            "inner_max_iters": DEFAULT_INNER_MAX_ITERS,
            "penalty_init": DEFAULT_PENALTY_INIT,
            "penalty_growth": DEFAULT_PENALTY_GROWTH,
            "penalty_max": DEFAULT_PENALTY_MAX,
            "multiplier_cap": DEFAULT_MULTIPLIER_CAP,
            "polish_bisections": POLISH_BISECTIONS,
            "oracle_cap": VERTEX_ORACLE_CAP,
        },
        "estimators": {
            "pairs": DEFAULT_PAIR_COUNT,
            "points": DEFAULT_ESTIMATOR_POINTS,
            "samples": DEFAULT_ESTIMATOR_SAMPLES,
        },
        "constants": {},
        "seeds": None,
        "check": None,
        "output": {"dir": str(DEFAULT_OUT_DIR)},
    }
