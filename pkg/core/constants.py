# Instance JSON documents carry this version; readers reject anything else
INSTANCE_SCHEMA_VERSION = 1

# Top-level packages whose loggers the CLI configures
LOGGER_NAMESPACES = ("handlers", "services", "storage")

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SOLVER_FAILURE = 2

# Default problem size: n=100, m=40, k=10, r=10, levels 100..5000
DEFAULT_N = 100
DEFAULT_M = 40
DEFAULT_K = 10
DEFAULT_R = 10.0
DEFAULT_LEVELS = (100, 250, 500, 1000, 2500, 5000)
DEFAULT_TRIALS = 20

# Vertex enumeration is combinatorial in num_vars + num_rows
ORACLE_MAX_SIZE = 12

# Raw sweep CSV, one row per (levels, trial, method, setting)
RAW_CSV_HEADER = (
    "levels",
    "trial",
    "method",
    "setting",
    "seed",
    "status",
    "iterations",
    "rel_l2_sq",
    "rel_l1",
    "sparsity",
    "fpr",
    "fnr",
    "zero_tol",
)

# Aggregated CSV, one row per (levels, method, setting)
AGGREGATE_CSV_HEADER = (
    "levels",
    "method",
    "setting",
    "trials",
    "failures",
    "mean_rel_l2_sq",
    "mean_rel_l1",
    "mean_sparsity",
    "mean_fpr",
    "mean_fnr",
    "mean_iterations",
)

# Wall-clock times are kept apart so the two files above stay reproducible
TIMINGS_CSV_HEADER = ("levels", "trial", "method", "setting", "wall_time")

RAW_CSV_NAME = "raw.csv"
AGGREGATE_CSV_NAME = "aggregate.csv"
TIMINGS_CSV_NAME = "timings.csv"


def format_float(value: float) -> str:
    """Shortest round-tripping text for a float, 'nan' for missing values."""
    return repr(float(value))

# Field named in a msgspec validation message: "... - at `$.A[0]`" or
# "Object missing required field `n`"
VALIDATION_PATH_PATTERN = r"(?:at `\$\.|field `)([A-Za-z_]+)"

# Seed, level and trial values are packed as signed 64-bit integers
INT64_MIN = -(2 ** 63)
INT64_MAX = 2 ** 63 - 1
