"""
Constants and configuration defaults for mlnn
━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━━
Where magic numbers become meaningful names.
"""

# Environment variables
ENV_JOBS = "MLNN_JOBS"
ENV_LOG_LEVEL = "MLNN_LOG_LEVEL"

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3

# Output files
REPORT_FILE = "report.json"
ERRORS_FILE = "errors.csv"
MANIFEST_FILE = "manifest.json"
COMPARISON_FILE = "comparison.csv"
LOG_FILE = "run.log"
CHECKPOINT_TEMPLATE = "network_level{level}.json"
SAMPLES_TEMPLATE = "samples_level{level}.jsonl"

# Numeric text formats (17 significant digits round-trip a double)
FLOAT_FORMAT = "{:.17g}"

# Problems
PROBLEM_ADVECTION_DIFFUSION = "advection-diffusion"
PROBLEM_BURGERS = "burgers"
PROBLEM_DIFFUSION = "diffusion"
PROBLEM_SYNTHETIC_2D = "synthetic-2d"
PROBLEM_KINDS = (
    PROBLEM_ADVECTION_DIFFUSION,
    PROBLEM_BURGERS,
    PROBLEM_DIFFUSION,
    PROBLEM_SYNTHETIC_2D,
)

# Grid and solver defaults
REFINEMENT_FACTOR = 2
MAX_CELL_REYNOLDS = 2.0
BURGERS_MIN_POINTS_PER_RE = 0.3
NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
NEWTON_MAX_HALVINGS = 10
NEWTON_ROUNDOFF_FACTOR = 8.0
SOLVER_RESIDUAL_LIMIT = 1e-10
BURGERS_REFERENCE_POINTS = 2**15
SYNTHETIC_MAX_EXTENT = 32
DISCRETIZATION_ORDER = 2

# Network defaults
FILTERS_FIRST_LAYER = 4
KERNEL_WIDTH = 3
LEARNING_RATE = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPSILON = 1e-8
MAX_EPOCHS = 20000
PLATEAU_PATIENCE = 500
PLATEAU_TOLERANCE = 1e-12

# Hyperparameter grids ("3 values for each hyperparameter")
LAMBDA_GRID = (0.0, 1e-6, 1e-3)
N_CNN_GRID = (2, 4, 6)
N_FC_GRID = (1, 3, 5)
WIDTH_FACTORS = (0.5, 1.0, 2.0)

# Multi-level defaults
EPSILON = 1e-8
EPSILON_ACC = 1e-6
MAX_LEVELS = 6
MAX_ENRICHMENT_ROUNDS = 50
VALIDATION_FRACTION = 0.2
MONOTONE_TOLERANCE = 0.05
HOLDOUT_SAMPLES = 50

# MLSC defaults
MLSC_EPSILON = 1e-10
MAX_CC_LEVEL = 10
