import os
from dotenv import load_dotenv
load_dotenv()

# Reproducibility
SEED_ENV_VAR = "SEQWIT_SEED"
DEFAULT_SEED = int(os.getenv(SEED_ENV_VAR, "2020"))

# Worker pool / optimizer
MAX_WORKERS = int(os.getenv("SEQWIT_MAX_WORKERS", "4"))
DEFAULT_RESTARTS = int(os.getenv("SEQWIT_RESTARTS", "100"))
MAX_EVALUATIONS_PER_RESTART = 2000
PENALTY_SCHEDULE = (1e1, 1e2, 1e3, 1e4)

# Numerical tolerances
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
ORACLE_TOL = 1e-10
ORACLE_BRANCH_CAP = 10**6
FEASIBILITY_TOL = 1e-6

# Threshold chains
MAX_CHAIN_STAGES = 64

# Reports
REPORT_SIGNIFICANT_DIGITS = 12


def default_seed() -> int:
    """Seed used when neither a flag nor a config file provides one."""
    return int(os.getenv(SEED_ENV_VAR, str(DEFAULT_SEED)))
