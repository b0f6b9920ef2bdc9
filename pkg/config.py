"""
c6proto Configuration
Defaults shared by the library and the command-line front end.
"""

# Tool Information
TOOL_NAME = "c6proto"
VERSION = "1.0.0"
LICENSE = "MIT"

# Numerical tolerances
ALGEBRA_TOL = 1e-12         # norms, Hermiticity, unitarity
EIGEN_TOL = 1e-10           # Gram matrices, entropies, fidelities
PROBABILITY_FLOOR = 1e-14   # below this a projection leaves no residual
COMPLETION_TOL = 1e-12      # completion outcomes must stay below this

# Randomness
DEFAULT_SEED = 2024
SEED_ENV_VAR = "QC6_SEED"

# Trial counts
ACCEPTANCE_TRIALS = 1000
RANDOM_PAYLOADS = 10             # payloads used to verify a synthesized correction
VALIDATION_RANDOM_PAYLOADS = 5   # payloads used per table row
RSP_PHI_GRID = 32
NO_SIGNALING_PAIRS = 10

# Batch processing
BATCH_SIZE = 50
MAX_WORKERS = 4

# Report settings
OUTPUT_ENCODING = "utf-8"
FIDELITY_DIGITS = 15

# Display settings
COLORS_ENABLED = True
VERBOSE = False
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
