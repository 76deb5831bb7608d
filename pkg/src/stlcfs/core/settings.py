"""
Project-wide constants or “settings” that are unlikely to change at runtime.
"""

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNVERIFIED = 2
EXIT_INFEASIBLE = 3
EXIT_VERIFY_FAILED = 4

DEFAULT_SCENARIO_FILE = "paper_urban.json"

# Run artifacts written by `plan`
TRAJECTORY_CSV = "trajectory.csv"
ROBUSTNESS_CSV = "robustness.csv"
ITERATIONS_CSV = "iterations.csv"
REPORT_JSON = "report.json"
SUMMARY_JSON = "summary.json"

# Plot-ready tables written by `report`
FIG1_PATH = "fig1_path.dat"
FIG2_OBJECTIVE = "fig2_objective.dat"
FIG3_TIME = "fig3_time.dat"
FIG4_MU = "fig4_mu.dat"

# ADMM internals
ADMM_RHO = 0.1
ADMM_SIGMA = 1e-6
ADMM_ALPHA = 1.6
ADMM_RHO_EQ_SCALE = 1e3
ADMM_RHO_MIN = 1e-6
ADMM_RHO_MAX = 1e6
ADMM_ADAPT_THRESHOLD = 5.0
ADMM_CHECK_EVERY = 25
ADMM_SCALING_ITERS = 10
ADMM_EPS_INFEASIBLE = 1e-5
SCALING_MIN_NORM = 1e-4
SCALING_MAX_NORM = 1e4

# Reference repair pushes samples at least this far outside a face
REPAIR_MIN_CLEARANCE = 0.1
