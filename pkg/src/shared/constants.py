"""Shared constants for the Flex-O toolkit."""
import math
from pathlib import Path

# Application info
APP_NAME = "Flex-O"
APP_VERSION = "0.1.0"

# Paths
DEFAULT_OUT_DIR = Path("out")
LOG_FILE_NAME = "flexo.log"
OFFICE_CORRIDOR_SCENARIO = Path(__file__).resolve().parent.parent.parent / "scenarios" / "office_corridor.json"

# Exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID_SCENARIO = 2
EXIT_NON_CONVERGENCE = 3
EXIT_INFEASIBLE = 4

# Feasibility tolerances (oracle vs first-order solver output)
ORACLE_TOLERANCE = 1e-9
SOLVER_FEASIBILITY_TOLERANCE = 1e-6
VERTEX_ORACLE_CAP = 20
VERTEX_CHUNK = 1 << 14

# Robust solver
DEFAULT_KKT_TOLERANCE = 1e-6
DEFAULT_MAX_ITERS = 200_000
DEFAULT_MAX_OUTER = 60
DEFAULT_INNER_MAX_ITERS = 5_000
DEFAULT_PENALTY_INIT = 10.0
DEFAULT_PENALTY_GROWTH = 10.0
DEFAULT_PENALTY_MAX = 1e8
DEFAULT_MULTIPLIER_CAP = 1e6
POLISH_BISECTIONS = 20
DEFAULT_RESOLUTION = 0.1

# Response models
CLAMP_LOW = -1.0
CLAMP_HIGH = 1.0
QUADRATURE_NODES = 64
TRUE_MODEL_LOWER = 19.0
TRUE_MODEL_UPPER = 20.5
MISSPECIFIED_PIVOT = 19.75
# N(0, 0.1) is read with 0.1 as the variance
TRUE_NOISE_SCALE = math.sqrt(0.1)

# Saddle dynamics
DEFAULT_U = 1.5
DEFAULT_DELTA = 0.2
DEFAULT_NU = 0.01
DEFAULT_ETA = 0.05
DEFAULT_X_MARGIN = 5.0
DEFAULT_BETA_MAX = 1.0
DEFAULT_LAMBDA_MAX = 100.0
REFERENCE_TOLERANCE = 1e-10
REFERENCE_MAX_ITERS = 1_000_000
REFERENCE_BACKTRACK_WINDOW = 2_000
CV_WINDOW = 100
CV_SAMPLES = 10_000

# Flex-O
DEFAULT_T = 500
DEFAULT_T_SWEEP = (50, 500, 5000)

# Office-corridor experiment (n = 7 offices)
OFFICE_N = 7
OFFICE_EPSILON_X = 0.001
OFFICE_EPSILON_BETA = 0.01
OFFICE_WEIGHT_RANGE = (0.1, 1.0)
OFFICE_X_REF_MEAN = 19.5
OFFICE_X_REF_STD = 1.0
OFFICE_ITERS = 10_000
OFFICE_REALIZATIONS = 50

# Estimators
DEFAULT_PAIR_COUNT = 2_000
DEFAULT_ESTIMATOR_POINTS = 20
DEFAULT_ESTIMATOR_SAMPLES = 2_000

# Named random streams, one seed each
SEED_STREAMS = ("weights", "x_ref", "noise", "bpd", "estimators", "cv")

# Worker pool
WORKERS_ENV = "FLEXO_WORKERS"
MIN_WORKERS = 1
MAX_WORKERS = 16
