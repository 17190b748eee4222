"""
Process-wide defaults for the EON toolkit.

Values are read once from the environment (and an optional ``.env`` file in the
working directory). Everything here is a plain module-level constant so that
library code can import defaults without touching the environment itself.
"""

import os

from dotenv import load_dotenv

load_dotenv()

LOG_LEVEL = os.getenv("EON_LOG_LEVEL", "INFO")
THREADS = int(os.getenv("EON_THREADS", "1"))
SEED = int(os.getenv("EON_SEED", "0"))

# Training defaults
THETA_FLOOR = float(os.getenv("EON_THETA_FLOOR", "1e-12"))
MAX_OUTER_ITERS = int(os.getenv("EON_MAX_OUTER_ITERS", "500"))
MAX_GAMMA_ITERS = int(os.getenv("EON_MAX_GAMMA_ITERS", "100"))
TOLERANCE = float(os.getenv("EON_TOLERANCE", "1e-8"))
GAMMA_TOLERANCE = float(os.getenv("EON_GAMMA_TOLERANCE", "1e-10"))

# Audit defaults
WEIGHT_THRESHOLD = float(os.getenv("EON_WEIGHT_THRESHOLD", "1e-3"))

# Epsilon values below this are solved in the zero-temperature (argmin) limit
HARD_EPSILON = 1e-300
