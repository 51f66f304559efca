import os

from dotenv import load_dotenv

load_dotenv()

# --- Logging ---
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# --- Run ledger ---
# unset means verify runs are not persisted
DATABASE_URL = os.getenv("DATABASE_URL")

# --- Workers ---
MAX_WORKERS = int(os.getenv("MAX_WORKERS", "1"))

# --- Linear algebra ---
PIVOT_RTOL = 1e-13
COFACTOR_RTOL = 1e-9
COND_LIMIT = 1e5

# --- Model validation ---
HERMITICITY_TOL = 1e-12

# --- Scattering ---
BAND_EDGE_TOL = 1e-8
POLE_TOL = 1e-12
CONSERVATION_TOL = 1e-10
NEGATIVE_CONTROL_MIN_DEFICIT = 1e-6

# --- PT fold ---
SIMILARITY_TOL = 1e-12

# --- Four-site closed forms ---
ZETA_POLE_TOL = 1e-13
DEGENERATE_TOL = 1e-13

# --- Wavepacket ---
RK4_STEP_FACTOR = 0.05
WAVEPACKET_TOL = 2e-2
# modes of the finite system growing faster than this are projected out
GROWTH_RATE_TOL = 1e-2
GAIN_NORM_RTOL = 0.1
MIN_CHAIN_HALF_LENGTH = 200
MIN_SIGMA = 5.0

# --- Verify suites ---
RESIDUAL_RTOL = 1e-10
CROSS_SOLVER_TOL = 1e-10
DET_REALITY_RTOL = 1e-10
SCHUR_RTOL = 1e-9
ABC_RTOL = 1e-10
PT_DEFECT_TOL = 1e-12
FOUR_SITE_TOL = 1e-10
MAX_CLUSTER_SIZE = 8
COUPLING_SCALE = 10.0
MOMENTA_PER_TRIAL = 10
FOUR_SITE_GRID = 201
GAMMA_MAX = 4.0
