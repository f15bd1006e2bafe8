"""
Numerical constants shared by the dc modules.
"""

# --- CONVEXITY CERTIFICATES ---
EPS_PSD = 1e-9              # smallest admissible eigenvalue of a QuadForm matrix
EPS_EVAL = 1e-9             # slack for nonnegativity of SquareOfNonneg children
SHIFT_MARGIN = 1e-6         # added to nonnegativity shifts in square()/variance
LOG_FLOOR = 1e-6            # compose_neg_log needs inf f >= LOG_FLOOR
SYMMETRY_TOL = 1e-12        # |Q - Q^T| allowed for QP matrices

# --- DOMAIN SAMPLING ---
DEFAULT_SAMPLE_RADIUS = 10.0    # infinite box bounds are clipped to +-radius when sampling
GRID_MIN_POINTS = 1000          # infimum_estimate grid size
GRID_MIN_PER_AXIS = 10
GRID_MAX_POINTS = 20000         # above this, a seeded random cloud replaces the grid
DOMAIN_TOL = 1e-9               # membership slack for points on the boundary

# --- BREAKPOINT SCANS ---
SENTINEL_OFFSET = 1.0
SCAN_TOL = 1e-9

# --- POLYHEDRA ---
VERTEX_TOL = 1e-9           # activity / rank decisions
DEDUP_TOL = 1e-8            # vertices closer than this are merged
MAX_VERTEX_DIM = 12
MAX_VERTEX_ROWS = 24
MAX_RAY_DIM = 18
DUALITY_TOL = 1e-8

# --- RISK ---
PROB_SUM_TOL = 1e-12
MAX_W_SCENARIOS = 12
MAX_PHI_VARIABLES = 12
ORACLE_TIE_TOL = 1e-12      # relative tie tolerance in VaR / m_u scans
PIECE_CONVEXITY_TRIALS = 100

# --- QUADRATIC PROGRAMS ---
MAX_QP_ROWS = 10
MAX_QP_DIM = 8
KKT_TOL = 1e-9
DOM_TOL = 1e-8
COPOSITIVE_SAMPLES = 10000
UNBOUNDED_THRESHOLD = -1e6
FACE_CONSTANCY_POINTS = 10
FACE_TOL = 1e-7
SELECTION_TOL = 1e-6
SELECTION_SAMPLES = 20
COVERAGE_SAMPLES = 200

# --- FOLDED PENALTIES ---
INFINITY_THRESHOLD = 1e6
ROOT_TOL = 1e-12
DEFAULT_FOLD_RADIUS = 10.0

# --- MONOTONE CONVEX CATALOG ---
CERTIFY_RADIUS = 50.0
CERTIFY_POINTS = 2001

# --- VERIFICATION ---
DEFAULT_SEED = 42
CONVEXITY_TOL = 1e-8
IDENTITY_TOL = 1e-7
LC1_TOL = 1e-8
CONVEXITY_TRIALS = 1000
IDENTITY_SAMPLES = 1000
LC1_SAMPLES = 500
