"""
Configuration for MOEDA drive-strength remapping - v1.0
"""
import os
import logging
from pathlib import Path

# ============================================================================
# ENVIRONMENT
# ============================================================================
IS_DEBUG = os.getenv("MOEDA_DEBUG", "0") == "1"
ENV_JOBS = os.getenv("MOEDA_JOBS")


def default_jobs():
    """Concurrent evaluations when --jobs is not given"""
    if ENV_JOBS:
        try:
            return max(1, int(ENV_JOBS))
        except ValueError:
            logger.warning(f"Ignoring non-integer MOEDA_JOBS={ENV_JOBS!r}")
    return os.cpu_count() or 1


# ============================================================================
# PATHS
# ============================================================================
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = Path(os.getenv("MOEDA_DATA_DIR", BASE_DIR / "data"))
BENCH_DIR = DATA_DIR / "benchmarks"

ISCAS85_BENCHMARKS = [
    "c17", "c432", "c499", "c880", "c1355", "c1908",
    "c2670", "c3540", "c5315", "c6288", "c7552",
]

# ============================================================================
# ELECTRICAL DEFAULTS (single corner: TT, 1.2V, 25C)
# ============================================================================
DEFAULT_VOLTAGE = 1.2                 # V
DEFAULT_CLOCK_PERIOD = 4e-9           # s (250 MHz)
DEFAULT_OUTPUT_DELAY = 0.0            # s
PRIMARY_INPUT_PROBABILITY = 0.5

# ============================================================================
# SYNTHETIC LIBRARY PROFILE
# ============================================================================
# Inverter ladder of the reduced-library experiment
STRENGTH_LABELS = [
    "D0", "D1", "D2", "D3", "D4", "D6", "D8", "D12", "D16", "D20", "D24",
]
DEFAULT_LIBRARY_NAME = "synthetic65"
BASE_RESISTANCE = 4.0e3               # Ohm, D1 inverter
BASE_INPUT_CAP = 1.5e-15              # F per pin, D1 inverter
BASE_AREA = 1.44                      # um^2
BASE_LEAKAGE = 5.0e-11                # W
BASE_INTERNAL_ENERGY = 1.0e-15        # J per output toggle
BASE_INTRINSIC_DELAY = 8.0e-12        # s
ARITY_FACTOR = 1.25
WIRE_CAP_PER_FANOUT = 0.5e-15         # F
MAX_ARITY = 10
CELL_FUNCTIONS = ["NOT", "BUF", "AND", "NAND", "OR", "NOR", "XOR", "XNOR"]
SINGLE_INPUT_FUNCTIONS = {"NOT", "BUF"}

# ============================================================================
# MOEA DEFAULTS
# ============================================================================
DEFAULT_POPULATION = 200
DEFAULT_GENERATIONS = 200
DEFAULT_MUTATION_RATE = 0.01
DEFAULT_RNG_SEED = 2024
HV_REFERENCE_FACTOR = 1.1

# ============================================================================
# DESIGN-SPACE EXPLORATION
# ============================================================================
DEFAULT_SWEEP_STEPS = 100
DEFAULT_SEED_COPIES = 5
DSE_GENERATIONS = 100
TIMING_LIMIT_STEPS = 100              # tightening increments across the relaxed delay

# ============================================================================
# BENCHMARK FETCHING
# ============================================================================
BENCH_MIRROR = os.getenv(
    "MOEDA_BENCH_MIRROR",
    "https://pld.ttu.ee/~maksim/benchmarks/iscas85/bench",
)
MAX_RETRIES = 3
TIMEOUT_SECONDS = 20

# ============================================================================
# LOGGING
# ============================================================================
LOG_LEVEL = logging.DEBUG if IS_DEBUG else getattr(
    logging, os.getenv("MOEDA_LOG_LEVEL", "INFO").upper(), logging.INFO
)
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

logging.basicConfig(
    level=LOG_LEVEL,
    format=LOG_FORMAT,
    handlers=[logging.StreamHandler()]
)

logger = logging.getLogger("moeda")

logger.debug(f"Data directory: {DATA_DIR}")
logger.debug(f"Benchmark directory: {BENCH_DIR}")
