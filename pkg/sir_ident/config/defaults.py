from yacs.config import CfgNode as CN

# -----------------------------------------------------------------------------
# Convention about parameter names
# -----------------------------------------------------------------------------
# Rates are per unit time, fractions are of the whole population n.
# beta_r / beta_u enter only the stochastic simulation; every deterministic
# computation uses the effective rate BETA_STAR = p*beta_r + (1-p)*beta_u.

# -----------------------------------------------------------------------------
# Config definition
# -----------------------------------------------------------------------------

_C = CN()
# -----------------------------------------------------------------------------
# MODEL
# -----------------------------------------------------------------------------
_C.MODEL = CN()
# Infectious-contact rate of reported individuals
_C.MODEL.BETA_R = 2.5
# Infectious-contact rate of unreported individuals
_C.MODEL.BETA_U = 1.5
# Reporting fraction, in (0, 1]
_C.MODEL.P = 0.4
# Fraction immune at t = 0, in [0, 1)
_C.MODEL.PI = 0.3
# Recovery rate (known, never estimated)
_C.MODEL.GAMMA = 1.0

# -----------------------------------------------------------------------------
# INIT
# -----------------------------------------------------------------------------
_C.INIT = CN()
# Population size
_C.INIT.N = 10000
# Initially reported infectious fraction; the unreported one is (1-p)/p * I0
_C.INIT.I0 = 0.001

# -----------------------------------------------------------------------------
# SIMULATION
# -----------------------------------------------------------------------------
_C.SIMULATION = CN()
# Horizon of a single simulation, 0 means run until extinction
_C.SIMULATION.END_TIME = 0.0

# -----------------------------------------------------------------------------
# ODE
# -----------------------------------------------------------------------------
_C.ODE = CN()
_C.ODE.T_END = 100.0
_C.ODE.DT = 1e-3
# Write every STRIDE-th grid point to the path CSV
_C.ODE.STRIDE = 100

# -----------------------------------------------------------------------------
# IDENTIFIABILITY
# -----------------------------------------------------------------------------
_C.IDENTIFIABILITY = CN()
# Sup-norm tolerance on I_r, as a fraction of n
_C.IDENTIFIABILITY.TOL = 1e-8
_C.IDENTIFIABILITY.T_END = 30.0
_C.IDENTIFIABILITY.DT = 1e-3
# Number of pi values in the manifold scan
_C.IDENTIFIABILITY.SCAN_POINTS = 101

# -----------------------------------------------------------------------------
# ESTIMATION
# -----------------------------------------------------------------------------
_C.ESTIMATION = CN()
# Fraction of n reported that closes the growth-fit window
_C.ESTIMATION.GROWTH_THRESHOLD = 0.075
# Count the n*i0 initially reported infectious in the cumulative curve
_C.ESTIMATION.INCLUDE_INITIAL = False
# Survey sample size
_C.ESTIMATION.SURVEY_SIZE = 1000

# -----------------------------------------------------------------------------
# EXPERIMENT
# -----------------------------------------------------------------------------
_C.EXPERIMENT = CN()
_C.EXPERIMENT.MASTER_SEED = 8402
# Number of major outbreaks to collect
_C.EXPERIMENT.TARGET_OUTBREAKS = 100
# Final reported fraction that separates major from minor outbreaks
_C.EXPERIMENT.OUTBREAK_THRESHOLD = 0.05
# Options: 'GivenPi', 'GivenP', 'Both'
_C.EXPERIMENT.BRANCH = 'Both'
# Give up after this many replicates, 0 means 50 * TARGET_OUTBREAKS
_C.EXPERIMENT.MAX_REPLICATES = 0
# Worker processes, -1 means half the cpu cores; 0 or 1 runs in-process
_C.EXPERIMENT.NUM_WORKERS = -1

# -----------------------------------------------------------------------------
# LIKELIHOOD
# -----------------------------------------------------------------------------
_C.LIKELIHOOD = CN()
# Relative step of the finite-difference checks
_C.LIKELIHOOD.FD_STEP = 1e-6

# ---------------------------------------------------------------------------- #
# Misc options
# ---------------------------------------------------------------------------- #
# Directory for reports and CSV outputs
_C.OUTPUT_DIR = "output"
# SQLite file where experiment runs are stored, empty disables storage
_C.RESULTS_DB = ""
